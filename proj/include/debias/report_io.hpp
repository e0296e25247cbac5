#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "debias/cluster_eval.hpp"
#include "debias/digest.hpp"
#include "debias/errors.hpp"
#include "debias/text_debias.hpp"

namespace debias {

using ordered_json = nlohmann::ordered_json;

inline ordered_json params_json(const DoubleHardParams& p) {
  return ordered_json{{"k_candidates", p.k_candidates},
                      {"n_per_pole", p.n_per_pole},
                      {"kmeans_seed", p.kmeans_seed},
                      {"kmeans_restarts", p.kmeans_restarts},
                      {"skip_equalize", p.skip_equalize}};
}

inline ordered_json trace_json(const DebiasTrace& t) {
  return ordered_json{
      {"kind", t.kind},
      {"params", params_json(t.params)},
      {"candidate_accuracies", t.candidate_accuracies},
      {"selected_index", t.selected_index},
      {"pool_positive", t.pool_positive},
      {"pool_negative", t.pool_negative},
      {"snapshots",
       ordered_json{{"input", hex_digest(t.input_hash)},
                    {"frequency_removed", hex_digest(t.frequency_removed_hash)},
                    {"output", hex_digest(t.output_hash)}}}};
}

inline ordered_json report_json(const ClusterReport& r) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.rows)
    rows.push_back(ordered_json{{"n", row.n},
                                {"before", row.accuracy_before},
                                {"after", row.accuracy_after}});
  return ordered_json{{"kind", r.kind},
                      // top-N is split as N/2 tokens per pole; pole
                      // membership under the before-direction is the truth
                      {"selection", "n_half_per_pole"},
                      {"rows", rows}};
}

namespace detail {

inline std::string format_fixed(double v, int precision) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::fixed, precision);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, static_cast<std::size_t>(ptr - buf));
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

// kind,n,before,after rows. `comment` (usually the resolved config) is
// embedded as leading `#` lines for provenance.
inline std::string reports_csv(const std::vector<ClusterReport>& reports,
                               std::string_view comment = {}) {
  std::string out;
  if (!comment.empty()) {
    out += "# ";
    out += comment;
    out += '\n';
  }
  out += "kind,n,before,after\n";
  for (const auto& r : reports)
    for (const auto& row : r.rows) {
      out += detail::csv_escape(r.kind);
      out += ',' + std::to_string(row.n);
      out += ',' + detail::format_fixed(row.accuracy_before, 6);
      out += ',' + detail::format_fixed(row.accuracy_after, 6);
      out += '\n';
    }
  return out;
}

// Aligned human-readable table mirroring the paper's accuracy tables.
inline std::string reports_text(const std::vector<ClusterReport>& reports) {
  std::size_t kind_w = 4;
  for (const auto& r : reports) kind_w = std::max(kind_w, r.kind.size());

  std::string out;
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s += std::string(w - s.size(), ' ');
    return s;
  };
  out += pad("kind", kind_w) + "  " + pad("top-N", 8) + pad("before", 10) + "after\n";
  for (const auto& r : reports)
    for (const auto& row : r.rows) {
      out += pad(r.kind, kind_w) + "  ";
      out += pad(std::to_string(row.n), 8);
      out += pad(detail::format_fixed(100.0 * row.accuracy_before, 1), 10);
      out += detail::format_fixed(100.0 * row.accuracy_after, 1) + "\n";
    }
  return out;
}

template <class Scalar>
std::string projection_csv(const Projection2DT<Scalar>& proj,
                           std::string_view comment = {}) {
  if (static_cast<Eigen::Index>(proj.ids.size()) != proj.coords.rows())
    throw DimensionError("projection_csv: id/coord count mismatch");
  std::string out;
  if (!comment.empty()) {
    out += "# ";
    out += comment;
    out += '\n';
  }
  out += "id,x,y\n";
  for (Eigen::Index i = 0; i < proj.coords.rows(); ++i) {
    out += detail::csv_escape(proj.ids[static_cast<std::size_t>(i)]);
    out += ',' + detail::format_fixed(static_cast<double>(proj.coords(i, 0)), 9);
    out += ',' + detail::format_fixed(static_cast<double>(proj.coords(i, 1)), 9);
    out += '\n';
  }
  return out;
}

// Write-to-temp-then-rename so failed runs never leave torn files at the
// destination path.
inline void atomic_write_file(const std::filesystem::path& path,
                              const std::function<void(std::ostream&)>& writer) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
      writer(out);
      out.flush();
      if (!out) throw Error("write failure on '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

inline void atomic_write_file(const std::filesystem::path& path,
                              std::string_view content) {
  atomic_write_file(path, [&](std::ostream& out) {
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  });
}

}  // namespace debias
