#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dcp {

/// One row of a transportation-network test file link table.
struct TntpLink {
  int init_node = 0;
  int term_node = 0;
  double capacity = 0.0;
  double length = 0.0;
  double free_flow_time = 0.0;
  double b = 0.0;
  double power = 0.0;
  double speed = 0.0;
  double toll = 0.0;
  int link_type = 0;
};

struct TntpNetwork {
  int n_nodes = 0;
  int n_links = 0;
  int first_thru_node = 1;
  std::vector<TntpLink> links; // file order; link ids are 1-based positions
};

/// Parse the standard TNTP header and link rows. Comment lines (~) and
/// whitespace variants are tolerated. Throws std::runtime_error with the
/// offending line number on malformed input.
TntpNetwork parse_tntp(std::istream& is, const std::string& name);
TntpNetwork load_tntp(const std::string& path);

/// Canonical re-emission; parse(emit(parse(f))) == parse(f).
void write_tntp(std::ostream& os, const TntpNetwork& net);

} // namespace dcp
