#include "dcp/harness/tntp.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dcp {

namespace {

[[noreturn]] void parse_fail(const std::string& name, int line,
                             const std::string& what) {
  throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
}

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

} // namespace

TntpNetwork parse_tntp(std::istream& is, const std::string& name) {
  TntpNetwork net;
  std::string raw;
  int line_no = 0;
  bool saw_nodes = false, saw_links = false, in_body = false;

  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = raw;
    // '~' opens a comment; everything after it is ignored
    if (auto pos = line.find('~'); pos != std::string::npos)
      line = line.substr(0, pos);
    line = strip(line);
    if (line.empty()) continue;

    if (line.front() == '<') {
      auto close = line.find('>');
      if (close == std::string::npos)
        parse_fail(name, line_no, "unterminated metadata tag");
      std::string tag = line.substr(1, close - 1);
      std::string value = strip(line.substr(close + 1));
      std::transform(tag.begin(), tag.end(), tag.begin(),
                     [](unsigned char c) { return std::toupper(c); });
      if (tag == "NUMBER OF NODES") {
        net.n_nodes = std::atoi(value.c_str());
        saw_nodes = true;
      } else if (tag == "NUMBER OF LINKS") {
        net.n_links = std::atoi(value.c_str());
        saw_links = true;
      } else if (tag == "FIRST THRU NODE") {
        net.first_thru_node = std::atoi(value.c_str());
      } else if (tag == "END OF METADATA") {
        in_body = true;
      }
      // unknown tags (e.g. number of zones) are skipped
      continue;
    }
    (void)in_body;

    // link row; a trailing ';' terminator is optional
    std::string row = line;
    if (!row.empty() && row.back() == ';') row.pop_back();
    std::istringstream fields(row);
    TntpLink l;
    if (!(fields >> l.init_node >> l.term_node >> l.capacity >> l.length >>
          l.free_flow_time))
      parse_fail(name, line_no, "malformed link row: " + strip(raw));
    fields >> l.b >> l.power >> l.speed >> l.toll >> l.link_type;
    if (l.init_node < 1 || l.term_node < 1)
      parse_fail(name, line_no, "node ids must be >= 1");
    if (!(l.capacity > 0.0))
      parse_fail(name, line_no, "link capacity must be > 0");
    net.links.push_back(l);
  }

  if (!saw_nodes || !saw_links)
    parse_fail(name, line_no,
               "missing <NUMBER OF NODES> or <NUMBER OF LINKS> header");
  if (static_cast<int>(net.links.size()) != net.n_links)
    parse_fail(name, line_no,
               "link count mismatch: header says " + std::to_string(net.n_links) +
                   ", found " + std::to_string(net.links.size()));
  for (const auto& l : net.links)
    if (l.init_node > net.n_nodes || l.term_node > net.n_nodes)
      parse_fail(name, line_no, "link references node beyond node count");
  return net;
}

TntpNetwork load_tntp(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_tntp: cannot open " + path);
  return parse_tntp(is, path);
}

void write_tntp(std::ostream& os, const TntpNetwork& net) {
  os << "<NUMBER OF NODES> " << net.n_nodes << "\n";
  os << "<NUMBER OF LINKS> " << net.n_links << "\n";
  os << "<FIRST THRU NODE> " << net.first_thru_node << "\n";
  os << "<END OF METADATA>\n";
  os << "~ init term capacity length fft b power speed toll type ;\n";
  char buf[256];
  for (const auto& l : net.links) {
    std::snprintf(buf, sizeof(buf),
                  "%d %d %.10g %.10g %.10g %.10g %.10g %.10g %.10g %d ;\n",
                  l.init_node, l.term_node, l.capacity, l.length,
                  l.free_flow_time, l.b, l.power, l.speed, l.toll, l.link_type);
    os << buf;
  }
}

} // namespace dcp
