// Copyright 2026 The mrank Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// File formats: MTEN1 binary tensors, binary PPM frame stacks, and CSV/JSON
// reports for rank and solver results.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrank/error.hpp"
#include "mrank/ranks.hpp"
#include "mrank/solvers.hpp"
#include "mrank/synth.hpp"
#include "mrank/tensor.hpp"

namespace mrank {

namespace fs = std::filesystem;
using nlohmann::json;

namespace detail {

inline std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::io, "read failed: " + path.string());
  return bytes;
}

inline void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace detail

inline constexpr std::array<char, 4> kMtenMagic{'M', 'T', 'E', 'N'};
inline constexpr std::uint8_t kMtenVersion = 0x01;

inline std::string encode_tensor(const Tensor& t) {
  require(t.order() <= 255, "MTEN1 supports at most 255 modes");
  std::string out(kMtenMagic.begin(), kMtenMagic.end());
  out.push_back(static_cast<char>(kMtenVersion));
  out.push_back(static_cast<char>(t.order()));
  for (auto n : t.dims()) detail::put_u64(out, n);
  out.reserve(out.size() + 16 * t.size());
  for (const auto& z : t.data()) {
    detail::put_u64(out, std::bit_cast<std::uint64_t>(z.real()));
    detail::put_u64(out, std::bit_cast<std::uint64_t>(z.imag()));
  }
  return out;
}

inline Tensor decode_tensor(const std::vector<unsigned char>& bytes, const std::string& what) {
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorKind::io, what + ": " + why);
  };
  if (bytes.size() < 6) throw fail("truncated header");
  if (!std::equal(kMtenMagic.begin(), kMtenMagic.end(), bytes.begin())) throw fail("bad magic");
  if (bytes[4] != kMtenVersion)
    throw fail("unsupported version " + std::to_string(static_cast<int>(bytes[4])));
  const std::size_t order = bytes[5];
  if (order == 0) throw fail("order must be positive");
  std::size_t pos = 6;
  if (bytes.size() < pos + 8 * order) throw fail("truncated dims");
  Dims dims(order);
  std::uint64_t count = 1;
  for (std::size_t j = 0; j < order; ++j, pos += 8) {
    const std::uint64_t n = detail::get_u64(bytes.data() + pos);
    if (n == 0) throw fail("zero-length dimension");
    if (count > std::numeric_limits<std::uint64_t>::max() / 16 / n) throw fail("dims overflow");
    count *= n;
    if (n > std::numeric_limits<std::size_t>::max()) throw fail("dims overflow");
    dims[j] = static_cast<std::size_t>(n);
  }
  const std::uint64_t payload = bytes.size() - pos;
  if (payload != 16 * count)
    throw fail("payload holds " + std::to_string(payload) + " bytes, dims need " +
               std::to_string(16 * count));
  std::vector<Complex> data(static_cast<std::size_t>(count));
  for (auto& z : data) {
    const double re = std::bit_cast<double>(detail::get_u64(bytes.data() + pos));
    const double im = std::bit_cast<double>(detail::get_u64(bytes.data() + pos + 8));
    z = {re, im};
    pos += 16;
  }
  return Tensor(std::move(dims), std::move(data));
}

inline void write_tensor(const Tensor& t, const fs::path& path) {
  detail::write_bytes(path, encode_tensor(t));
}

inline Tensor read_tensor(const fs::path& path) {
  return decode_tensor(detail::read_bytes(path), path.string());
}

// ---------------------------------------------------------------- frames

/// Frames as a (height, width, 3, frames) tensor with values in [0, 1].
struct FrameStack {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t frames = 0;
  Tensor tensor;

  static FrameStack from_tensor(Tensor t) {
    require(t.order() == 4 && t.dim(2) == 3, "frame tensors have dims (height, width, 3, frames)");
    FrameStack s{t.dim(0), t.dim(1), t.dim(3), {}};
    s.tensor = std::move(t);
    return s;
  }
};

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<unsigned char> rgb;  // row-major, 3 bytes per pixel
};

inline Image parse_ppm(const std::vector<unsigned char>& bytes, const std::string& what) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) { return Error(ErrorKind::io, what + ": " + why); };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> std::size_t {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw fail("malformed header");
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos++] - '0');
      if (v > (1u << 24)) throw fail("header value too large");
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw fail("not a binary PPM (P6)");
  pos = 2;
  Image img;
  img.width = number();
  img.height = number();
  const std::size_t maxval = number();
  if (img.width == 0 || img.height == 0) throw fail("empty image");
  if (maxval != 255) throw fail("only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("malformed header");
  ++pos;
  const std::size_t need = 3 * img.width * img.height;
  if (bytes.size() - pos < need) throw fail("truncated pixel data");
  img.rgb.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                 bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return img;
}

inline std::string encode_ppm(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                    "\n255\n";
  out.append(img.rgb.begin(), img.rgb.end());
  return out;
}

inline std::vector<fs::path> list_ppm(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::io, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".ppm") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

/// Reads every *.ppm in `dir` in lexicographic order; pixel v -> v / 255.
inline FrameStack read_frames(const fs::path& dir) {
  const auto files = list_ppm(dir);
  if (files.empty()) throw Error(ErrorKind::io, "no .ppm frames in " + dir.string());
  FrameStack s;
  for (std::size_t f = 0; f < files.size(); ++f) {
    const Image img = parse_ppm(detail::read_bytes(files[f]), files[f].string());
    if (f == 0) {
      s.height = img.height;
      s.width = img.width;
      s.frames = files.size();
      s.tensor = Tensor({s.height, s.width, 3, s.frames});
    } else if (img.height != s.height || img.width != s.width) {
      throw Error(ErrorKind::io, "frame " + files[f].string() + " is " +
                                     std::to_string(img.width) + "x" +
                                     std::to_string(img.height) + ", expected " +
                                     std::to_string(s.width) + "x" + std::to_string(s.height));
    }
    for (std::size_t i = 0; i < s.height; ++i)
      for (std::size_t j = 0; j < s.width; ++j)
        for (std::size_t c = 0; c < 3; ++c)
          s.tensor.at({i, j, c, f}) = img.rgb[3 * (i * s.width + j) + c] / 255.0;
  }
  return s;
}

struct FrameWriteSummary {
  std::size_t frames = 0;
  double max_imag = 0.0;
  bool imag_warning = false;  // some |Im| exceeded 1e-6
};

inline constexpr double kFrameImagTol = 1e-6;

/// Writes frame_00000.ppm, ... into `dir` (created if missing). Real parts
/// are clamped to [0, 1] and rounded to 8 bits; imaginary parts are dropped.
inline FrameWriteSummary write_frames(const FrameStack& s, const fs::path& dir,
                                      const std::string& prefix = "frame_") {
  require(s.tensor.order() == 4 && s.tensor.dim(2) == 3 && s.tensor.dim(0) == s.height &&
              s.tensor.dim(1) == s.width && s.tensor.dim(3) == s.frames,
          "frame stack dims are inconsistent");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
  FrameWriteSummary sum;
  for (std::size_t f = 0; f < s.frames; ++f) {
    Image img{s.width, s.height, std::vector<unsigned char>(3 * s.width * s.height)};
    for (std::size_t i = 0; i < s.height; ++i)
      for (std::size_t j = 0; j < s.width; ++j)
        for (std::size_t c = 0; c < 3; ++c) {
          const Complex z = s.tensor.at({i, j, c, f});
          sum.max_imag = std::max(sum.max_imag, std::abs(z.imag()));
          const double v = std::clamp(std::isfinite(z.real()) ? z.real() : 0.0, 0.0, 1.0);
          img.rgb[3 * (i * s.width + j) + c] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
    char name[32];
    std::snprintf(name, sizeof name, "%05zu.ppm", f);
    detail::write_bytes(dir / (prefix + name), encode_ppm(img));
  }
  sum.frames = s.frames;
  sum.imag_warning = sum.max_imag > kFrameImagTol;
  return sum;
}

// ---------------------------------------------------------------- JSON

inline void to_json(json& j, const RankReport& r) {
  json pr = json::array();
  for (const auto& p : r.pairing_ranks)
    pr.push_back({{"pairing", p.pairing.to_string()}, {"rank", p.rank}});
  j = {{"m_plus", r.m_plus},   {"m_minus", r.m_minus},   {"tucker", r.tucker},
       {"pairing_ranks", pr}, {"cp_lower", r.cp_lower}, {"cp_upper", r.cp_upper}};
}

inline void from_json(const json& j, RankReport& r) {
  r.m_plus = j.at("m_plus").get<int>();
  r.m_minus = j.at("m_minus").get<int>();
  r.tucker = j.at("tucker").get<std::vector<int>>();
  r.pairing_ranks.clear();
  for (const auto& p : j.at("pairing_ranks"))
    r.pairing_ranks.push_back(
        {Pairing::parse(p.at("pairing").get<std::string>()), p.at("rank").get<int>()});
  r.cp_lower = j.at("cp_lower").get<long long>();
  r.cp_upper = j.at("cp_upper").get<long long>();
}

namespace detail {

inline json optional_number(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

inline std::optional<double> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace detail

/// Solver summary: everything except the tensors. The trace is optional.
inline json solve_summary(const SolveResult& r, bool with_trace) {
  json j = {{"iters", r.iters},
            {"converged", r.converged},
            {"rel_err_vs_truth", detail::optional_number(r.rel_err_vs_truth)},
            {"rel_err_all", detail::optional_number(r.rel_err_all)},
            {"rank_report", r.rank_report}};
  if (with_trace) j["residual_trace"] = r.residual_trace;
  return j;
}

inline void to_json(json& j, const SolveResult& r) { j = solve_summary(r, true); }

inline void from_json(const json& j, SolveResult& r) {
  r.iters = j.at("iters").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.rel_err_vs_truth = detail::read_optional(j, "rel_err_vs_truth");
  r.rel_err_all = detail::read_optional(j, "rel_err_all");
  r.rank_report = j.at("rank_report").get<RankReport>();
  r.residual_trace = j.value("residual_trace", std::vector<double>{});
}

inline void to_json(json& j, const InstanceSpec& s) {
  j = {{"dims", s.dims}, {"r", s.r}, {"k", s.k}, {"form", to_string(s.form)}, {"seed", s.seed}};
}

inline void from_json(const json& j, InstanceSpec& s) {
  s.dims = j.at("dims").get<Dims>();
  s.r = j.at("r").get<int>();
  s.k = j.value("k", 0);
  s.form = parse_form(j.at("form").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
}

// ---------------------------------------------------------------- reports

enum class ReportFormat { csv, json };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw Error(ErrorKind::invalid_argument, "unknown report format: " + std::string(s));
}

using Cell = std::variant<std::monostate, long long, double, bool, std::string>;

/// Named columns and rows of cells; the unit every report is written from.
struct ReportTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    require(row.size() == columns.size(), "report row width does not match the header");
    rows.push_back(std::move(row));
  }
};

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

inline std::string csv_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const { return csv_escape(v); }
    std::string operator()(double v) const {
      if (std::isnan(v)) return "nan";
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", v);
      return buf;
    }
  };
  return std::visit(Visitor{}, c);
}

inline json json_cell(const Cell& c) {
  struct Visitor {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(long long v) const { return v; }
    json operator()(bool v) const { return v; }
    json operator()(const std::string& v) const { return v; }
    json operator()(double v) const { return std::isfinite(v) ? json(v) : json(nullptr); }
  };
  return std::visit(Visitor{}, c);
}

}  // namespace detail

inline std::string render_csv(const ReportTable& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    out += (c ? "," : "") + detail::csv_escape(t.columns[c]);
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + detail::csv_cell(row[c]);
    out += "\n";
  }
  return out;
}

inline json render_json(const ReportTable& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t c = 0; c < row.size(); ++c) obj[t.columns[c]] = detail::json_cell(row[c]);
    rows.push_back(std::move(obj));
  }
  return rows;
}

inline std::string render(const ReportTable& t, ReportFormat fmt) {
  return fmt == ReportFormat::csv ? render_csv(t) : render_json(t).dump(2) + "\n";
}

inline std::string tuple_string(const std::vector<int>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

inline ReportTable rank_report_table(const std::vector<RankReport>& reports) {
  ReportTable t{{"m_plus", "m_minus", "tucker", "cp_lower", "cp_upper", "pairing_ranks"}, {}};
  for (const auto& r : reports) {
    std::string pr;
    for (const auto& p : r.pairing_ranks)
      pr += (pr.empty() ? "" : " ") + p.pairing.to_string() + "=" + std::to_string(p.rank);
    t.add({static_cast<long long>(r.m_plus), static_cast<long long>(r.m_minus),
           tuple_string(r.tucker), r.cp_lower, r.cp_upper, pr});
  }
  return t;
}

inline ReportTable solve_result_table(const std::vector<SolveResult>& results) {
  ReportTable t{{"iters", "converged", "rel_err_vs_truth", "rel_err_all", "m_plus", "m_minus",
                 "tucker", "cp_lower", "cp_upper"},
                {}};
  auto opt = [](const std::optional<double>& v) -> Cell {
    if (v) return *v;
    return std::monostate{};
  };
  for (const auto& r : results) {
    t.add({static_cast<long long>(r.iters), r.converged, opt(r.rel_err_vs_truth),
           opt(r.rel_err_all), static_cast<long long>(r.rank_report.m_plus),
           static_cast<long long>(r.rank_report.m_minus), tuple_string(r.rank_report.tucker),
           r.rank_report.cp_lower, r.rank_report.cp_upper});
  }
  return t;
}

inline void write_report(const ReportTable& t, const fs::path& path, ReportFormat fmt) {
  detail::write_bytes(path, render(t, fmt));
}

/// CSV gets the flat table; JSON is the lossless serialization.
inline void write_report(const std::vector<RankReport>& reports, const fs::path& path,
                         ReportFormat fmt) {
  if (fmt == ReportFormat::csv) return write_report(rank_report_table(reports), path, fmt);
  detail::write_bytes(path, json(reports).dump(2) + "\n");
}

inline void write_report(const std::vector<SolveResult>& results, const fs::path& path,
                         ReportFormat fmt, bool with_trace = false) {
  if (fmt == ReportFormat::csv) return write_report(solve_result_table(results), path, fmt);
  json arr = json::array();
  for (const auto& r : results) arr.push_back(solve_summary(r, with_trace));
  detail::write_bytes(path, arr.dump(2) + "\n");
}

inline std::vector<RankReport> read_rank_reports(const fs::path& path) {
  const auto bytes = detail::read_bytes(path);
  try {
    return json::parse(bytes.begin(), bytes.end()).get<std::vector<RankReport>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, path.string() + ": " + e.what());
  }
}

inline std::vector<SolveResult> read_solve_results(const fs::path& path) {
  const auto bytes = detail::read_bytes(path);
  try {
    return json::parse(bytes.begin(), bytes.end()).get<std::vector<SolveResult>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, path.string() + ": " + e.what());
  }
}

/// Masks persist as MTEN1 indicator tensors (1 observed, 0 missing).
inline Tensor mask_to_tensor(const Mask& m) {
  Tensor t(m.dims);
  for (auto k : m.observed) t[k] = 1.0;
  return t;
}

inline Mask mask_from_tensor(const Tensor& t) {
  Mask m{t.dims(), {}, 0.0};
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Complex z = t[k];
    require(z == Complex{} || z == Complex{1.0}, "mask tensors hold only 0 and 1");
    if (z != Complex{}) m.observed.push_back(k);
  }
  m.ratio = static_cast<double>(m.observed.size()) / static_cast<double>(t.size());
  return m;
}

}  // namespace mrank
