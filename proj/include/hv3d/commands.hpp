#pragma once

// Batch operations behind the hv3d command-line tool. Each command reads its
// inputs, writes its outputs atomically, and prints a short human-readable
// report to `log`.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "hv3d/aggregate.hpp"
#include "hv3d/cyclopean.hpp"
#include "hv3d/distortions.hpp"
#include "hv3d/error.hpp"
#include "hv3d/evaluation.hpp"
#include "hv3d/fileio.hpp"
#include "hv3d/video_io.hpp"

namespace hv3d {

struct RunConfig {
  MetricConfig metric;
  Weights weights;
  bool noise_luma_only = false;
  std::uint64_t seed = 1;

  void validate() const {
    metric.validate();
    if (!weights.finite()) throw ConfigError("weights must be finite");
  }
};

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {
      "frame", "vif_y_l", "vif_u_l", "vif_v_l", "vif_y_r", "vif_u_r",
      "vif_v_r", "q_rl", "q_d", "hv3d"};
  return cols;
}

namespace detail {

inline void write_breakdown_values(std::ostream& out, const QualityBreakdown& b) {
  out << format_real(b.vif_y_left) << ',' << format_real(b.vif_u_left) << ','
      << format_real(b.vif_v_left) << ',' << format_real(b.vif_y_right) << ','
      << format_real(b.vif_u_right) << ',' << format_real(b.vif_v_right) << ','
      << format_real(b.q_rl) << ',' << format_real(b.q_d) << ','
      << format_real(b.hv3d);
}

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

using Key = std::pair<std::string, std::string>;

inline std::map<Key, double> read_keyed_values(const fs::path& path,
                                               const std::string& value_column) {
  auto table = read_csv(path, {"label", "distortion", value_column});
  const int l = table.column("label"), d = table.column("distortion"),
            v = table.column(value_column);
  std::map<Key, double> out;
  for (const auto& row : table.rows) {
    Key k{row[l], row[d]};
    if (out.count(k))
      throw IngestError(path.string() + ": duplicate row for (" + k.first + ", " +
                        k.second + ")");
    out[k] = parse_real(row[v], path.string() + " column '" + value_column + "'");
  }
  return out;
}

inline std::map<Key, double> read_mos(const fs::path& path) {
  auto mos = read_keyed_values(path, "mos");
  if (mos.empty()) throw IngestError("MOS file '" + path.string() + "' has no rows");
  for (const auto& [k, v] : mos)
    if (!(v >= 1.0 && v <= 10.0))
      throw IngestError("MOS for (" + k.first + ", " + k.second +
                        ") is outside the 1-10 scale: " + format_real(v));
  return mos;
}

inline SequenceScore score_entries(const ManifestEntry& ref, const ManifestEntry& dist,
                                   const RunConfig& cfg) {
  if (ref.width != dist.width || ref.height != dist.height)
    throw ContractError("'" + ref.label + "' and '" + dist.label +
                        "' have different dimensions");
  if (ref.frame_count != dist.frame_count)
    throw ContractError("frame count mismatch: '" + ref.label + "' has " +
                        std::to_string(ref.frame_count) + " frames, '" + dist.label +
                        "' has " + std::to_string(dist.frame_count));
  StereoReader r(ref), d(dist);
  return hv3d_sequence(r, d, cfg.weights, cfg.metric);
}

}  // namespace detail

// Reads weights either inline ("w1,w2,w3,w4") or from a weights CSV file with
// header w1,w2,w3,w4.
inline Weights parse_weights(const std::string& text) {
  auto parts = split(text, ',');
  if (parts.size() == 4 && !fs::exists(text)) {
    std::array<double, 4> w{};
    try {
      for (int i = 0; i < 4; ++i) w[i] = parse_real(parts[i], "weights");
    } catch (const IngestError& e) {
      throw ConfigError(e.what());
    }
    return Weights::from_array(w);
  }
  auto table = read_csv(text, {"w1", "w2", "w3", "w4"});
  if (table.rows.size() != 1)
    throw IngestError("weights file '" + text + "' must contain exactly one row");
  std::array<double, 4> w{};
  const char* names[] = {"w1", "w2", "w3", "w4"};
  for (int i = 0; i < 4; ++i)
    w[i] = parse_real(table.rows[0][table.column(names[i])], text);
  return Weights::from_array(w);
}

inline void write_weights(const fs::path& path, const Weights& w) {
  AtomicOutputFile f(path);
  f.stream() << "w1,w2,w3,w4\n"
             << format_real(w.w1) << ',' << format_real(w.w2) << ','
             << format_real(w.w3) << ',' << format_real(w.w4) << '\n';
  f.commit();
}

inline void write_score_report(const fs::path& path, const SequenceScore& s) {
  AtomicOutputFile f(path);
  f.stream() << detail::join(report_columns()) << '\n';
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    f.stream() << i << ',';
    detail::write_breakdown_values(f.stream(), s.frames[i]);
    f.stream() << '\n';
  }
  f.commit();
}

// ---------------------------------------------------------------------------
// score

inline SequenceScore cmd_score(const fs::path& manifest_path, const std::string& ref_label,
                               const std::string& dist_label, const RunConfig& cfg,
                               const fs::path& report_csv, std::ostream& log) {
  cfg.validate();
  auto m = load_manifest(manifest_path);
  auto score = detail::score_entries(m.find(ref_label), m.find(dist_label), cfg);
  if (!report_csv.empty()) write_score_report(report_csv, score);
  log << "pooled_hv3d=" << format_real(score.pooled) << " frames=" << score.frames.size()
      << " ref=" << ref_label << " dist=" << dist_label << '\n';
  return score;
}

struct ScoredEntry {
  std::string reference;
  std::string distortion;
  QualityBreakdown pooled;  // component means, hv3d = pooled score
};

// Scores every distorted entry of a manifest against its reference and
// writes label,distortion,score plus the pooled components.
inline std::vector<ScoredEntry> cmd_score_all(const fs::path& manifest_path,
                                              const RunConfig& cfg,
                                              const fs::path& scores_csv,
                                              std::ostream& log) {
  cfg.validate();
  auto m = load_manifest(manifest_path);
  std::vector<ScoredEntry> out;
  for (const auto& e : m.entries) {
    if (!e.is_distorted()) continue;
    auto s = detail::score_entries(m.find(e.reference), e, cfg);
    out.push_back({e.reference, e.distortion, s.mean_components()});
    log << e.reference << ',' << e.distortion << ": " << format_real(s.pooled) << '\n';
  }
  if (out.empty())
    throw ConfigError("manifest '" + manifest_path.string() + "' has no distorted entries");
  if (!scores_csv.empty()) {
    AtomicOutputFile f(scores_csv);
    f.stream() << "label,distortion,score,"
               << detail::join({report_columns().begin() + 1, report_columns().end()})
               << '\n';
    for (const auto& s : out) {
      f.stream() << s.reference << ',' << s.distortion << ','
                 << format_real(s.pooled.hv3d) << ',';
      detail::write_breakdown_values(f.stream(), s.pooled);
      f.stream() << '\n';
    }
    f.commit();
  }
  return out;
}

// ---------------------------------------------------------------------------
// distort

namespace detail {

inline std::string expand_pattern(std::string pattern, const std::string& label,
                                  const std::string& view) {
  auto replace = [&](const std::string& key, const std::string& value) {
    for (auto pos = pattern.find(key); pos != std::string::npos;
         pos = pattern.find(key, pos + value.size()))
      pattern.replace(pos, key.size(), value);
  };
  replace("{label}", label);
  replace("{view}", view);
  return pattern;
}

// Streams `ref` through `spec` into two YUV files, processing `batch` frames
// at a time in parallel and writing them in frame order.
inline void synthesize(const ManifestEntry& ref, const DistortionSpec& spec,
                       const fs::path& left_out, const fs::path& right_out,
                       unsigned threads) {
  StereoReader reader(ref);
  AtomicOutputFile left(left_out, true), right(right_out, true);
  const std::size_t batch = std::max(1u, resolve_threads(threads));
  std::uint64_t index = 0;
  for (;;) {
    std::vector<StereoFrame> in;
    while (in.size() < batch)
      if (auto f = reader.next()) in.push_back(std::move(*f));
      else break;
    if (in.empty()) break;
    std::vector<StereoFrame> out(in.size());
    parallel_for(in.size(), threads,
                 [&](std::size_t i) { out[i] = distort_frame(in[i], spec, index + i); });
    for (const auto& f : out) {
      write_frame(left.stream(), f.left);
      write_frame(right.stream(), f.right);
    }
    index += in.size();
  }
  left.commit();
  right.commit();
}

}  // namespace detail

// Applies every spec to every reference (non-distorted) entry. Synthesized
// views go to `out_dir`; depth maps are referenced from the input, never
// rewritten. Returns the emitted manifest (references first, then one entry
// per reference x spec), also written to out_dir/manifest.txt.
inline Manifest cmd_distort(const fs::path& manifest_path,
                            const std::vector<DistortionSpec>& specs,
                            const fs::path& out_dir, unsigned threads,
                            std::ostream& log) {
  if (specs.empty()) throw ConfigError("no distortion specs given");
  for (const auto& s : specs) s.validate();
  for (std::size_t i = 0; i < specs.size(); ++i)
    for (std::size_t j = i + 1; j < specs.size(); ++j)
      if (specs[i].id == specs[j].id)
        throw ConfigError("duplicate distortion id '" + specs[i].id + "'");
  auto in = load_manifest(manifest_path);
  const fs::path in_dir =
      manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IngestError("cannot create '" + out_dir.string() + "': " + ec.message());

  Manifest out;
  std::vector<const ManifestEntry*> refs;
  for (const auto& e : in.entries)
    if (!e.is_distorted()) {
      refs.push_back(&e);
      out.entries.push_back(e);
    }
  if (refs.empty()) throw ConfigError("manifest has no reference entries");

  for (const auto* ref : refs)
    for (const auto& spec : specs) {
      ManifestEntry d = *ref;
      d.label = ref->label + "__" + spec.id;
      d.reference = ref->label;
      d.distortion = spec.id;
      if (spec.kind == DistortionKind::external) {
        auto resolve = [&](const std::string& view) {
          fs::path p = detail::expand_pattern(spec.pattern, ref->label, view);
          return p.is_absolute() ? p : in_dir / p;
        };
        d.left_path = resolve("left");
        d.right_path = resolve("right");
        for (const auto& p : {d.left_path, d.right_path})
          if (!fs::exists(p))
            throw IngestError("external distortion '" + spec.id + "' for '" +
                              ref->label + "': missing file '" + p.string() + "'");
        if (auto depth = resolve("depth"); fs::exists(depth)) d.depth_path = depth;
        // validate lengths now rather than at scoring time
        StereoReader check(d);
      } else {
        d.left_path = out_dir / (d.label + "_left.yuv");
        d.right_path = out_dir / (d.label + "_right.yuv");
        detail::synthesize(*ref, spec, d.left_path, d.right_path, threads);
      }
      log << "wrote " << d.label << " (" << kind_name(spec.kind) << ")\n";
      out.entries.push_back(std::move(d));
    }
  write_manifest(out_dir / "manifest.txt", out);
  log << (out.entries.size() - refs.size()) << " distorted sequences\n";
  return out;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrationRun {
  CalibrationResult result;
  std::vector<FeatureRow> rows;
  std::vector<detail::Key> keys;
};

inline CalibrationRun cmd_calibrate(const fs::path& manifest_path, const fs::path& mos_csv,
                                    const RunConfig& cfg, const fs::path& weights_out,
                                    const fs::path& report_out, std::ostream& log) {
  cfg.validate();
  auto mos = detail::read_mos(mos_csv);
  auto m = load_manifest(manifest_path);

  std::vector<std::string> missing;
  for (const auto& e : m.entries)
    if (e.is_distorted() && !mos.count({e.reference, e.distortion}))
      missing.push_back("(" + e.reference + ", " + e.distortion + ")");
  if (!missing.empty()) {
    std::string msg = "MOS file '" + mos_csv.string() + "' lacks rows for";
    for (const auto& s : missing) msg += " " + s;
    throw IngestError(msg);
  }

  CalibrationRun run;
  for (const auto& e : m.entries) {
    if (!e.is_distorted()) continue;
    auto s = detail::score_entries(m.find(e.reference), e, cfg);
    run.rows.push_back(make_feature_row(s.mean_components(), mos[{e.reference, e.distortion}]));
    run.keys.emplace_back(e.reference, e.distortion);
  }
  if (run.rows.empty())
    throw ConfigError("manifest '" + manifest_path.string() + "' has no distorted entries");
  run.result = fit_weights(run.rows);

  if (!weights_out.empty()) write_weights(weights_out, run.result.weights);
  if (!report_out.empty()) {
    AtomicOutputFile f(report_out);
    f.stream() << "label,distortion,f1,f2,f3,f4,target,predicted,residual\n";
    for (std::size_t i = 0; i < run.rows.size(); ++i) {
      const auto& r = run.rows[i];
      f.stream() << run.keys[i].first << ',' << run.keys[i].second << ','
                 << format_real(r.f1) << ',' << format_real(r.f2) << ','
                 << format_real(r.f3) << ',' << format_real(r.f4) << ','
                 << format_real(r.target) << ','
                 << format_real(r.predict(run.result.weights)) << ','
                 << format_real(run.result.residuals[i]) << '\n';
    }
    f.commit();
  }
  const auto& w = run.result.weights;
  log << "w1=" << format_real(w.w1) << " w2=" << format_real(w.w2)
      << " w3=" << format_real(w.w3) << " w4=" << format_real(w.w4)
      << " rmse=" << format_real(run.result.rmse) << " rows=" << run.rows.size() << '\n';
  for (const auto& warn : run.result.warnings) log << "warning: " << warn << '\n';
  return run;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluationReport {
  std::size_t pairs = 0;
  double spearman = 0;
  bool has_logistic = false;
  LogisticFit logistic;
};

inline EvaluationReport cmd_evaluate(const fs::path& scores_csv, const fs::path& mos_csv,
                                     const fs::path& plot_out, std::ostream& log) {
  auto scores = detail::read_keyed_values(scores_csv, "score");
  auto mos = detail::read_mos(mos_csv);
  std::vector<double> x, y;
  for (const auto& [k, s] : scores)
    if (auto it = mos.find(k); it != mos.end()) {
      x.push_back(s);
      y.push_back(it->second);
    }
  if (x.empty())
    throw EvaluationError("no (label, distortion) pairs shared by '" + scores_csv.string() +
                          "' and '" + mos_csv.string() + "'");

  EvaluationReport rep;
  rep.pairs = x.size();
  rep.spearman = spearman(x, y);
  log << "pairs=" << rep.pairs << " spearman=" << format_real(rep.spearman) << '\n';
  if (x.size() >= 5) {
    try {
      rep.logistic = logistic_fit(x, y);
    } catch (const ConvergenceError& e) {
      // No finite optimum (e.g. exactly linear data); report the last iterate.
      rep.logistic = evaluate_logistic(e.best(), x, y, LogisticOptions{}.max_iterations);
      rep.logistic.converged = false;
    }
    rep.has_logistic = true;
    const auto& p = rep.logistic.params;
    log << "logistic a=" << format_real(p.a) << " b=" << format_real(p.b)
        << " c=" << format_real(p.c) << " d=" << format_real(p.d)
        << " rmse=" << format_real(rep.logistic.rmse)
        << " pearson=" << format_real(rep.logistic.pearson_after)
        << (rep.logistic.degenerate ? " (degenerate: flat curve)" : "")
        << (rep.logistic.converged ? "" : " (not converged: iteration cap reached)") << '\n';
  } else {
    log << "logistic fit skipped: needs at least 5 pairs\n";
  }
  if (!plot_out.empty()) {
    AtomicOutputFile f(plot_out);
    f.stream() << "score,mos,fitted\n";
    for (std::size_t i = 0; i < x.size(); ++i)
      f.stream() << format_real(x[i]) << ',' << format_real(y[i]) << ','
                 << (rep.has_logistic ? format_real(rep.logistic.fitted[i]) : "") << '\n';
    f.commit();
  }
  return rep;
}

// ---------------------------------------------------------------------------
// dump-mask

inline CsfMask cmd_dump_mask(int block_size, const fs::path& out, std::ostream& log) {
  auto mask = build_csf_mask(block_size);
  auto write = [&](std::ostream& os) {
    os << "v,u,weight\n";
    for (int v = 0; v < mask.size; ++v)
      for (int u = 0; u < mask.size; ++u)
        os << v << ',' << u << ',' << format_real(mask.weights(u, v)) << '\n';
  };
  if (out.empty()) {
    write(log);
  } else {
    AtomicOutputFile f(out);
    write(f.stream());
    f.commit();
  }
  double sum = 0;
  for (double w : mask.weights.samples()) sum += w;
  log << "# values=" << mask.weights.size()
      << " mean=" << format_real(sum / static_cast<double>(mask.weights.size())) << '\n';
  return mask;
}

}  // namespace hv3d
