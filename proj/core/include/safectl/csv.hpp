#pragma once

#include <string>

#include "safectl/sim.hpp"

namespace safectl {

/// Header: t,x0..x{n-1},u_des0..,u_act0..,h_0..,V,delta,qp_status,active_set.
/// Floats carry 17 significant digits so a reload is bit-faithful; active_set
/// is semicolon-joined. Throws Error on an unwritable path.
void write_csv(const TrajectoryLog& log, const std::string& path);

std::string csv_text(const TrajectoryLog& log);

/// Inverse of write_csv for the row data (outcome metadata is not part of the
/// CSV). Throws ParseError on malformed content, Error on IO.
TrajectoryLog read_csv(const std::string& path);

TrajectoryLog parse_csv_text(const std::string& text);

}  // namespace safectl
