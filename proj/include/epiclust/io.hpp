#pragma once

// Text formats. Every file starts with a "# format: <name> v1" comment; other
// lines starting with '#' and blank lines are ignored by the readers. Floats
// are written in shortest round-trip form.
//
//   matches v1          one pair per line: "x y x' y'"
//   fmatrix v1          three rows of three floats, canonical F
//   groundtruth v1      fmatrix rows, then one 0/1 truth flag per pair
//   decision-figure v1  CSV "index,rho,delta,gamma,inlier,parent" (parent -1 for the top point)
//   benchmark v1        CSV "method,th,alpha,seed,time_ms,mean_error_px,d1_px,status"

#include <epiclust/error.hpp>
#include <epiclust/evaluation.hpp>
#include <epiclust/geometry.hpp>
#include <epiclust/pipeline.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace epiclust::io {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline double parse_double(std::string_view token, std::size_t line) {
  double v = 0.0;
  const char* first = token.data();
  if (!token.empty() && token.front() == '+') ++first;
  const auto res = std::from_chars(first, token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size() || !std::isfinite(v)) {
    throw ParseError(line, "not a finite number: '" + std::string(token) + "'");
  }
  return v;
}

inline bool is_skippable(std::string_view line) {
  const auto tokens = split_ws(line);
  return tokens.empty() || tokens.front().front() == '#';
}

/// Calls `fn(tokens, line_number)` for each data line.
template <class Fn>
void for_each_data_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_skippable(line)) continue;
    fn(split_ws(line), number);
  }
}

inline void write_matrix_rows(std::ostream& out, const Matrix3& f) {
  for (int r = 0; r < 3; ++r) {
    out << format_double(f(r, 0)) << ' ' << format_double(f(r, 1)) << ' ' << format_double(f(r, 2)) << '\n';
  }
}

}  // namespace detail

inline void write_matches(std::ostream& out, std::span<const MatchPair> pairs) {
  out << "# format: matches v1\n";
  for (const auto& p : pairs) {
    out << format_double(p.m.x) << ' ' << format_double(p.m.y) << ' ' << format_double(p.m_prime.x) << ' '
        << format_double(p.m_prime.y) << '\n';
  }
}

inline std::vector<MatchPair> read_matches(std::istream& in) {
  std::vector<MatchPair> pairs;
  detail::for_each_data_line(in, [&](const std::vector<std::string_view>& tokens, std::size_t line) {
    if (tokens.size() != 4) {
      throw ParseError(line, "expected 4 values \"x y x' y'\", found " + std::to_string(tokens.size()));
    }
    pairs.push_back(MatchPair::from_pixels(detail::parse_double(tokens[0], line), detail::parse_double(tokens[1], line),
                                           detail::parse_double(tokens[2], line),
                                           detail::parse_double(tokens[3], line)));
  });
  return pairs;
}

inline void write_fmatrix(std::ostream& out, const FundamentalMatrix& f) {
  out << "# format: fmatrix v1\n";
  detail::write_matrix_rows(out, f.matrix());
}

namespace detail {

inline Matrix3 read_matrix_rows(const std::vector<std::vector<std::string_view>>& rows,
                                const std::vector<std::size_t>& lines) {
  Matrix3 f;
  for (int r = 0; r < 3; ++r) {
    if (rows[r].size() != 3) {
      throw ParseError(lines[r], "expected 3 values per matrix row, found " + std::to_string(rows[r].size()));
    }
    for (int c = 0; c < 3; ++c) f(r, c) = parse_double(rows[r][c], lines[r]);
  }
  return f;
}

}  // namespace detail

inline FundamentalMatrix read_fmatrix(std::istream& in) {
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::string> storage;
  std::vector<std::size_t> lines;
  std::string line;
  std::size_t number = 0;
  std::size_t last = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::is_skippable(line)) continue;
    if (storage.size() == 3) throw ParseError(number, "unexpected data after the 3 matrix rows");
    storage.push_back(line);
    lines.push_back(number);
    last = number;
  }
  if (storage.size() != 3) throw ParseError(last + 1, "expected 3 matrix rows");
  for (const auto& s : storage) rows.push_back(detail::split_ws(s));
  try {
    return canonicalize(detail::read_matrix_rows(rows, lines));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(lines.front(), e.what());
  }
}

struct GroundTruth {
  FundamentalMatrix f0;
  std::vector<bool> truth_mask;
};

inline void write_ground_truth(std::ostream& out, const FundamentalMatrix& f0, const std::vector<bool>& mask) {
  out << "# format: groundtruth v1\n";
  detail::write_matrix_rows(out, f0.matrix());
  out << "# truth mask, one flag per pair (1 = genuine)\n";
  for (const bool b : mask) out << (b ? "1\n" : "0\n");
}

inline GroundTruth read_ground_truth(std::istream& in) {
  std::vector<std::string> storage;
  std::vector<std::size_t> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::is_skippable(line)) continue;
    storage.push_back(line);
    lines.push_back(number);
  }
  if (storage.size() < 3) throw ParseError(number + 1, "expected 3 matrix rows");
  std::vector<std::vector<std::string_view>> rows;
  for (int r = 0; r < 3; ++r) rows.push_back(detail::split_ws(storage[r]));
  std::optional<FundamentalMatrix> f0;
  try {
    f0 = canonicalize(detail::read_matrix_rows(rows, lines));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(lines.front(), e.what());
  }
  std::vector<bool> mask;
  for (std::size_t k = 3; k < storage.size(); ++k) {
    const auto tokens = detail::split_ws(storage[k]);
    if (tokens.size() != 1 || (tokens[0] != "0" && tokens[0] != "1")) {
      throw ParseError(lines[k], "truth flag must be 0 or 1");
    }
    mask.push_back(tokens[0] == "1");
  }
  return {*f0, std::move(mask)};
}

inline void write_decision_figure(std::ostream& out, const DecisionFigure& fig) {
  out << "# format: decision-figure v1\n";
  out << "# d_c=" << format_double(fig.d_c) << " alpha=" << format_double(fig.alpha)
      << " curve_constant=" << format_double(fig.curve_constant) << '\n';
  out << "index,rho,delta,gamma,inlier,parent\n";
  for (const auto& r : fig.records) {
    out << r.index << ',' << r.rho << ',' << format_double(r.delta) << ',' << format_double(r.gamma) << ','
        << (r.inlier ? 1 : 0) << ',';
    if (r.nearest_higher == kNoParent) {
      out << -1;
    } else {
      out << r.nearest_higher;
    }
    out << '\n';
  }
}

/// Minimal static scatter of (rho, delta) with the rho * delta = const curve.
inline void write_decision_svg(std::ostream& out, const DecisionFigure& fig) {
  constexpr double w = 640.0;
  constexpr double h = 480.0;
  constexpr double pad = 40.0;
  double rho_max = 1.0;
  double delta_max = 1.0;
  for (const auto& r : fig.records) {
    rho_max = std::max(rho_max, static_cast<double>(r.rho));
    delta_max = std::max(delta_max, r.delta);
  }
  const auto sx = [&](double rho) { return pad + (w - 2 * pad) * rho / rho_max; };
  const auto sy = [&](double delta) { return h - pad - (h - 2 * pad) * delta / delta_max; };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"" << h - 8 << "\">rho</text>\n";
  out << "<text x=\"8\" y=\"" << h / 2 << "\">delta</text>\n";
  if (fig.curve_constant > 0.0) {
    out << "<polyline fill=\"none\" stroke=\"red\" points=\"";
    for (int k = 1; k <= 200; ++k) {
      const double rho = rho_max * k / 200.0;
      const double delta = std::min(delta_max, fig.curve_constant / rho);
      out << sx(rho) << ',' << sy(delta) << ' ';
    }
    out << "\"/>\n";
  }
  for (const auto& r : fig.records) {
    out << "<circle cx=\"" << sx(r.rho) << "\" cy=\"" << sy(r.delta) << "\" r=\"3\" fill=\""
        << (r.inlier ? "steelblue" : "none") << "\" stroke=\"steelblue\"/>\n";
  }
  out << "</svg>\n";
}

inline std::string format_time_ms(double ms) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", ms);
  return buf;
}

inline void write_benchmark_header(std::ostream& out) {
  out << "# format: benchmark v1\n";
  out << "method,th,alpha,seed,time_ms,mean_error_px,d1_px,status\n";
}

inline void write_benchmark_row(std::ostream& out, const BenchmarkRow& row) {
  const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << method_name(row.method) << ',' << opt(row.threshold) << ',' << opt(row.alpha) << ',' << row.seed << ','
      << format_time_ms(row.time_ms) << ',' << opt(row.mean_error_px) << ',' << opt(row.d1_px) << ','
      << row.status << '\n';
}

inline void write_benchmark(std::ostream& out, std::span<const BenchmarkRow> rows) {
  write_benchmark_header(out);
  for (const auto& r : rows) write_benchmark_row(out, r);
}

}  // namespace epiclust::io
