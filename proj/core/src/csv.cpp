#include "safectl/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "safectl/errors.hpp"

namespace safectl {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double to_double(const std::string& s, int line_no) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("csv line " + std::to_string(line_no) + ": bad number '" + s +
                         "'");
    }
}

}  // namespace

std::string csv_text(const TrajectoryLog& log) {
    const int num_h = log.rows.empty() ? static_cast<int>(log.h_names.size())
                                       : static_cast<int>(log.rows.front().h.size());
    std::ostringstream os;
    os << "t";
    for (int i = 0; i < log.n; ++i) os << ",x" << i;
    for (int i = 0; i < log.m; ++i) os << ",u_des" << i;
    for (int i = 0; i < log.m; ++i) os << ",u_act" << i;
    for (int i = 0; i < num_h; ++i) os << ",h_" << i;
    os << ",V,delta,qp_status,active_set\n";

    for (const auto& row : log.rows) {
        os << fmt(row.t);
        for (int i = 0; i < log.n; ++i) os << "," << fmt(row.x(i));
        for (int i = 0; i < log.m; ++i) os << "," << fmt(row.u_des(i));
        for (int i = 0; i < log.m; ++i) os << "," << fmt(row.u_act(i));
        for (int i = 0; i < num_h; ++i) os << "," << fmt(row.h(i));
        os << "," << fmt(row.V) << "," << fmt(row.delta) << "," << row.qp_status << ",";
        for (size_t i = 0; i < row.active_set.size(); ++i) {
            if (i) os << ";";
            os << row.active_set[i];
        }
        os << "\n";
    }
    return os.str();
}

void write_csv(const TrajectoryLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << csv_text(log);
    if (!out) throw Error("failed writing '" + path + "'");
}

TrajectoryLog parse_csv_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("csv: empty input");

    const std::vector<std::string> cols = split(line, ',');
    TrajectoryLog log;
    int num_h = 0;
    for (const auto& c : cols) {
        if (c.size() >= 2 && c[0] == 'x' && c.find_first_not_of("0123456789", 1) ==
                                                std::string::npos) {
            ++log.n;
        } else if (c.rfind("u_des", 0) == 0) {
            ++log.m;
        } else if (c.rfind("h_", 0) == 0) {
            ++num_h;
        }
    }
    const size_t expected = 1 + static_cast<size_t>(log.n) +
                            2 * static_cast<size_t>(log.m) +
                            static_cast<size_t>(num_h) + 4;
    if (cols.size() != expected) {
        throw ParseError("csv: header has " + std::to_string(cols.size()) +
                         " columns, expected " + std::to_string(expected));
    }

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != expected) {
            throw ParseError("csv line " + std::to_string(line_no) + ": has " +
                             std::to_string(f.size()) + " fields, expected " +
                             std::to_string(expected));
        }
        LogRow row;
        size_t i = 0;
        row.t = to_double(f[i++], line_no);
        row.x = Vec(log.n);
        for (int k = 0; k < log.n; ++k) row.x(k) = to_double(f[i++], line_no);
        row.u_des = Vec(log.m);
        for (int k = 0; k < log.m; ++k) row.u_des(k) = to_double(f[i++], line_no);
        row.u_act = Vec(log.m);
        for (int k = 0; k < log.m; ++k) row.u_act(k) = to_double(f[i++], line_no);
        row.h = Vec(num_h);
        for (int k = 0; k < num_h; ++k) row.h(k) = to_double(f[i++], line_no);
        row.V = to_double(f[i++], line_no);
        row.delta = to_double(f[i++], line_no);
        row.qp_status = f[i++];
        const std::string& active = f[i++];
        if (!active.empty()) {
            for (const auto& tok : split(active, ';')) {
                row.active_set.push_back(static_cast<int>(to_double(tok, line_no)));
            }
        }
        row.perturbation = (row.u_act - row.u_des).norm();
        log.rows.push_back(std::move(row));
    }
    return log;
}

TrajectoryLog read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv_text(buf.str());
}

}  // namespace safectl
