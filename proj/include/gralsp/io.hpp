#pragma once

#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gralsp/graph.hpp"
#include "gralsp/matrix.hpp"
#include "gralsp/walks.hpp"

namespace gralsp {

struct NamedEmbeddings {
  std::vector<std::string> names;
  Matrix values;
};

/// Header "<rows> <dim>", then one "<id> <v1> ... <vdim>" line per row.
inline void write_embeddings(std::span<const std::string> names, const Matrix& m, std::ostream& out) {
  if (names.size() != m.rows()) throw std::invalid_argument("write_embeddings: name count mismatch");
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << m.rows() << ' ' << m.cols() << "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << names[i];
    for (double x : m.row(i)) out << ' ' << x;
    out << "\n";
  }
  out.precision(old);
}

inline NamedEmbeddings read_embeddings(std::istream& in, const std::string& source = "embeddings") {
  std::string line;
  std::size_t lineno = 0;
  NamedEmbeddings e;
  std::size_t rows = 0, cols = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line)) continue;
    auto tok = detail::split_ws(line);
    if (!header) {
      auto r = tok.size() == 2 ? detail::parse_double(tok[0]) : std::nullopt;
      auto c = tok.size() == 2 ? detail::parse_double(tok[1]) : std::nullopt;
      if (!r || !c || *r < 0 || *c < 1) throw ParseError(source, lineno, "expected header '<rows> <dim>'");
      rows = static_cast<std::size_t>(*r);
      cols = static_cast<std::size_t>(*c);
      e.values = Matrix(rows, cols);
      header = true;
      continue;
    }
    if (e.names.size() == rows) throw ParseError(source, lineno, "more rows than the header declares");
    if (tok.size() != cols + 1) {
      throw ParseError(source, lineno, "expected an id and " + std::to_string(cols) + " values");
    }
    const std::size_t r = e.names.size();
    e.names.emplace_back(tok[0]);
    for (std::size_t j = 0; j < cols; ++j) {
      auto v = detail::parse_double(tok[j + 1]);
      if (!v) throw ParseError(source, lineno, "bad number '" + std::string(tok[j + 1]) + "'");
      e.values(r, j) = *v;
    }
  }
  if (!header) throw ParseError(source, lineno, "missing header");
  if (e.names.size() != rows) throw ParseError(source, lineno, "fewer rows than the header declares");
  return e;
}

/// "<id> <class>" lines.
inline std::vector<std::pair<std::string, std::string>> read_label_lines(std::istream& in,
                                                                         const std::string& source = "labels") {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line)) continue;
    auto tok = detail::split_ws(line);
    if (tok.size() != 2) throw ParseError(source, lineno, "expected '<id> <class>'");
    out.emplace_back(std::string(tok[0]), std::string(tok[1]));
  }
  return out;
}

/// CSV "node_id,pattern,probability", patterns dash-joined.
inline void write_node_distributions(const WalkCorpus& c, const Graph& g, std::ostream& out) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "node_id,pattern,probability\n";
  for (NodeId v = 0; v < c.num_nodes(); ++v)
    for (const auto& pp : c.node_dist(v))
      out << g.name(v) << ',' << pattern_to_string(c.registry().steps(pp.pattern)) << ',' << pp.probability << "\n";
  out.precision(old);
}

inline void write_graph_distribution(const WalkCorpus& c, std::ostream& out) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "pattern,probability\n";
  const auto& dist = c.graph_dist();
  for (PatternId id = 0; id < dist.size(); ++id)
    out << pattern_to_string(c.registry().steps(id)) << ',' << dist[id] << "\n";
  out.precision(old);
}

}  // namespace gralsp
