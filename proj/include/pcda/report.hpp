#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pcda/error.hpp"
#include "pcda/io.hpp"
#include "pcda/trainer.hpp"

namespace pcda {

/// One row of a run summary or ablation table.
struct RunSummary {
  std::string run;
  std::size_t epochs = 0;
  double final_acc_source = 0.0;
  std::optional<double> final_acc_target;
  std::optional<double> best_acc_target;
  std::size_t best_epoch = 0;
  std::array<std::optional<double>, kSubsets> final_pl_acc;
};

inline RunSummary summarize(const std::string& run, const std::vector<MetricsRecord>& metrics) {
  if (metrics.empty()) throw ConfigError("report: no metrics records in " + run);
  RunSummary s;
  s.run = run;
  s.epochs = metrics.size();
  const auto& last = metrics.back();
  s.final_acc_source = last.acc_source;
  s.final_acc_target = last.acc_target;
  s.final_pl_acc = last.pl_acc;
  for (const auto& r : metrics) {
    if (r.acc_target && (!s.best_acc_target || *r.acc_target > *s.best_acc_target)) {
      s.best_acc_target = r.acc_target;
      s.best_epoch = r.epoch;
    }
  }
  return s;
}

namespace detail {
inline std::string csv_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }
}  // namespace detail

inline std::string summaries_csv(const std::vector<RunSummary>& rows) {
  std::ostringstream out;
  out << "run,epochs,final_acc_source,final_acc_target,best_acc_target,best_epoch,"
         "final_pl_acc_easy,final_pl_acc_moderate,final_pl_acc_hard\n";
  for (const auto& r : rows) {
    out << r.run << ',' << r.epochs << ',' << format_double(r.final_acc_source) << ','
        << detail::csv_cell(r.final_acc_target) << ',' << detail::csv_cell(r.best_acc_target) << ','
        << r.best_epoch << ',' << detail::csv_cell(r.final_pl_acc[0]) << ','
        << detail::csv_cell(r.final_pl_acc[1]) << ',' << detail::csv_cell(r.final_pl_acc[2]) << '\n';
  }
  return out.str();
}

inline Json summaries_json(const std::vector<RunSummary>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back({{"run", r.run},
                   {"epochs", r.epochs},
                   {"final_acc_source", r.final_acc_source},
                   {"final_acc_target", detail::optional_json(r.final_acc_target)},
                   {"best_acc_target", detail::optional_json(r.best_acc_target)},
                   {"best_epoch", r.best_epoch},
                   {"final_pl_acc_easy", detail::optional_json(r.final_pl_acc[0])},
                   {"final_pl_acc_moderate", detail::optional_json(r.final_pl_acc[1])},
                   {"final_pl_acc_hard", detail::optional_json(r.final_pl_acc[2])}});
  }
  return arr;
}

/// Plot-ready per-epoch pseudo-label accuracy; empty cells where a subset
/// does not exist yet.
inline std::string pl_curves_csv(const std::vector<MetricsRecord>& metrics) {
  std::ostringstream out;
  out << "epoch,pl_acc_easy,pl_acc_moderate,pl_acc_hard\n";
  for (const auto& r : metrics) {
    out << r.epoch << ',' << detail::csv_cell(r.pl_acc[0]) << ',' << detail::csv_cell(r.pl_acc[1])
        << ',' << detail::csv_cell(r.pl_acc[2]) << '\n';
  }
  return out.str();
}

}  // namespace pcda
