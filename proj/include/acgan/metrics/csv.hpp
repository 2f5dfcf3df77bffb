#pragma once

#include <sstream>
#include <string>

#include "acgan/core/meta.hpp"
#include "acgan/metrics/evaluation.hpp"

namespace acgan::metrics {

inline constexpr int kCsvSchemaVersion = 1;

namespace impl {

inline std::string csv_preamble(const std::string& name, const std::string& header) {
  return "# " + name + " schema v" + std::to_string(kCsvSchemaVersion) + "\n" + header + "\n";
}

inline std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

}  // namespace impl

inline std::string diversity_csv(const DiversityReport& r) {
  std::ostringstream os;
  os << impl::csv_preamble("diversity", "class,mean_msssim,std_msssim,pairs,flag_ge_0.25");
  os << "# threshold=" << format_double(r.threshold) << " scales=" << r.scales << "\n";
  for (const auto& row : r.rows)
    os << row.cls << ',' << format_double(row.mean) << ',' << format_double(row.std) << ',' << row.pairs << ','
       << (row.flagged ? 1 : 0) << "\n";
  return os.str();
}

inline std::string curve_csv(const DiscriminabilityCurve& c) {
  std::string header = "resolution,accuracy_mean,accuracy_std";
  const std::size_t k = c.points.empty() ? 0 : c.points.front().per_class.size();
  for (std::size_t i = 0; i < k; ++i) header += ",class_" + std::to_string(i);
  std::ostringstream os;
  os << impl::csv_preamble("curve", header);
  os << "# native=" << c.native << " subsets=" << c.subsets << "\n";
  for (const auto& p : c.points) {
    os << p.resolution << ',' << format_double(p.accuracy) << ',' << format_double(p.std);
    for (double a : p.per_class) os << ',' << format_double(a);
    os << "\n";
  }
  return os.str();
}

inline std::string iscore_csv(const InceptionScoreReport& r) {
  std::ostringstream os;
  os << impl::csv_preamble("iscore", "group,score");
  os << "# mean=" << format_double(r.mean) << " std=" << format_double(r.std) << " groups=" << r.groups
     << " samples=" << r.samples << " dropped=" << r.dropped << "\n";
  for (std::size_t g = 0; g < r.scores.size(); ++g) os << g << ',' << format_double(r.scores[g]) << "\n";
  return os.str();
}

inline std::string joint_csv(const JointReport& r) {
  std::ostringstream os;
  os << impl::csv_preamble("joint", "class,msssim,accuracy");
  os << "# pearson_r=" << (r.r_defined ? format_double(r.r) : "undefined")
     << " r_squared=" << (r.r_defined ? format_double(r.r_squared) : "undefined")
     << " low_diversity=" << r.low_diversity << " low_diversity_acc_le_cutoff=" << impl::opt(r.low_diversity_low_accuracy)
     << " high_diversity=" << r.high_diversity
     << " high_diversity_acc_gt_cutoff=" << impl::opt(r.high_diversity_high_accuracy)
     << " cutoff=" << format_double(r.accuracy_cutoff) << "\n";
  for (const auto& row : r.rows)
    os << row.cls << ',' << format_double(row.msssim) << ',' << format_double(row.accuracy) << "\n";
  return os.str();
}

inline std::string nn_csv(const std::vector<Neighbor>& n) {
  std::ostringstream os;
  os << impl::csv_preamble("nn", "sample_id,train_index,l1_distance");
  for (std::size_t i = 0; i < n.size(); ++i) os << i << ',' << n[i].index << ',' << format_double(n[i].distance) << "\n";
  return os.str();
}

inline std::string collapse_csv(const std::vector<CollapseTrajectory>& ts) {
  std::ostringstream os;
  os << impl::csv_preamble("collapse", "class,iteration,mean_msssim,std_msssim,collapse");
  for (const auto& t : ts)
    for (std::size_t i = 0; i < t.mean.size(); ++i)
      os << t.cls << ',' << t.iterations[i] << ',' << format_double(t.mean[i]) << ',' << format_double(t.std[i]) << ','
         << (t.collapse_index && *t.collapse_index == i ? 1 : 0) << "\n";
  return os.str();
}

}  // namespace acgan::metrics
