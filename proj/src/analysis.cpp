#include "frames/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "frames/csv.hpp"

namespace frames {

// ---------------------------------------------------------------------------
// Join

JoinResult join_records(std::span<const Annotation> annotations,
                        std::span<const ClassificationRecord> classifications) {
  // Later entries overwrite earlier ones; insertion order of keys is kept.
  std::map<std::pair<std::string, std::string>, std::size_t> ann_latest, cls_latest;
  std::vector<std::pair<std::string, std::string>> ann_order, cls_order;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    std::pair key{annotations[i].item_id, annotations[i].annotator_id};
    if (ann_latest.insert_or_assign(key, i).second) ann_order.push_back(key);
  }
  for (std::size_t i = 0; i < classifications.size(); ++i) {
    std::pair key{classifications[i].item_id, classifications[i].model_id};
    if (cls_latest.insert_or_assign(key, i).second) cls_order.push_back(key);
  }

  std::map<std::string, std::vector<std::size_t>> cls_by_item;
  for (const auto& key : cls_order) cls_by_item[key.first].push_back(cls_latest[key]);
  std::set<std::string> annotated_items;

  JoinResult out;
  for (const auto& key : ann_order) {
    const auto& a = annotations[ann_latest[key]];
    annotated_items.insert(a.item_id);
    auto it = cls_by_item.find(a.item_id);
    if (it == cls_by_item.end()) {
      ++out.n_unjoined_annotations;
      continue;
    }
    for (std::size_t ci : it->second) {
      const auto& c = classifications[ci];
      out.pairs.push_back({a.item_id, a.annotator_id, c.model_id, a.main_frame, a.alternative_frame,
                           c.distribution, a.shown_word_count.value_or(c.word_count)});
    }
  }
  for (const auto& key : cls_order) {
    if (!annotated_items.count(key.first)) ++out.n_unjoined_classifications;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Confusion

std::size_t ConfusionMatrix::at(Frame human, Frame machine) const {
  return counts[position_in(order, human)][position_in(order, machine)];
}
std::size_t& ConfusionMatrix::at(Frame human, Frame machine) {
  return counts[position_in(order, human)][position_in(order, machine)];
}
std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) for (auto c : row) t += c;
  return t;
}
std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < kFrameCount; ++i) t += counts[i][i];
  return t;
}
std::size_t ConfusionMatrix::row_sum(Frame human) const {
  std::size_t t = 0;
  for (auto c : counts[position_in(order, human)]) t += c;
  return t;
}
std::size_t ConfusionMatrix::column_sum(Frame machine) const {
  std::size_t t = 0;
  const auto j = position_in(order, machine);
  for (const auto& row : counts) t += row[j];
  return t;
}

ConfusionMatrix tally_confusion(std::span<const JoinedPair> pairs, const FrameOrder& order) {
  validate_frame_order(order);
  ConfusionMatrix m;
  m.order = order;
  for (const auto& p : pairs) ++m.at(p.human, p.machine.predominant);
  return m;
}

AgreementReport confusion_and_accuracy(std::span<const JoinedPair> pairs, const FrameOrder& order) {
  if (pairs.empty()) throw EmptyJoin();
  JoinResult join;
  join.pairs.assign(pairs.begin(), pairs.end());
  return agreement_report(join, order);
}

AgreementReport agreement_report(const JoinResult& join, const FrameOrder& order) {
  AgreementReport r;
  r.confusion = tally_confusion(join.pairs, order);
  for (Frame f : kAllFrames) r.per_frame_agreement[frame_index(f)] = r.confusion.at(f, f);
  r.n_joined = join.pairs.size();
  r.n_unjoined_annotations = join.n_unjoined_annotations;
  r.n_unjoined_classifications = join.n_unjoined_classifications;
  if (r.n_joined > 0) {
    r.accuracy = static_cast<double>(r.confusion.trace()) / static_cast<double>(r.confusion.total());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Length bins

void BinSpec::validate() const {
  if (width == 0 || cap == 0 || cap % width != 0) {
    throw std::invalid_argument("bin cap must be a positive multiple of a positive bin width");
  }
}

std::size_t BinSpec::bin_of(std::size_t words) const { return std::min(words / width, cap / width); }

std::string BinSpec::label(std::size_t bin) const {
  if (bin + 1 >= bin_count()) return std::to_string(cap) + "+";
  return std::to_string(bin * width) + "-" + std::to_string((bin + 1) * width - 1);
}

std::size_t LengthBinReport::total() const {
  std::size_t t = 0;
  for (const auto& g : counts) for (auto c : g) t += c;
  return t;
}

LengthBinReport length_bins(std::span<const JoinedPair> pairs, LengthGrouping grouping, const BinSpec& bins) {
  bins.validate();
  LengthBinReport r;
  r.grouping = grouping;
  r.bins = bins;
  r.group_names = grouping == LengthGrouping::agreement
                      ? std::array<std::string, 2>{"agreement", "disagreement"}
                      : std::array<std::string, 2>{"with_alternative", "without_alternative"};
  const auto n = bins.bin_count();
  for (std::size_t g = 0; g < 2; ++g) {
    r.counts[g].assign(n, 0);
    r.within_group[g].assign(n, 0.0);
    r.within_bin[g].assign(n, 0.0);
  }
  for (const auto& p : pairs) {
    const bool first = grouping == LengthGrouping::agreement ? p.agreement() : p.human_alternative.has_value();
    ++r.counts[first ? 0 : 1][bins.bin_of(p.word_count)];
  }
  for (std::size_t g = 0; g < 2; ++g) {
    std::size_t group_total = 0;
    for (auto c : r.counts[g]) group_total += c;
    if (group_total == 0) continue;
    for (std::size_t b = 0; b < n; ++b) {
      r.within_group[g][b] = static_cast<double>(r.counts[g][b]) / static_cast<double>(group_total);
    }
  }
  for (std::size_t b = 0; b < n; ++b) {
    const auto bin_total = r.counts[0][b] + r.counts[1][b];
    if (bin_total == 0) continue;
    for (std::size_t g = 0; g < 2; ++g) {
      r.within_bin[g][b] = static_cast<double>(r.counts[g][b]) / static_cast<double>(bin_total);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Probabilities

double human_label_probability(const JoinedPair& pair, bool renormalize) {
  const double p = pair.machine[pair.human];
  if (!renormalize) return p;
  const double total = pair.machine.frame_total();
  return total > 0.0 ? p / total : 0.0;
}

std::size_t probability_bin(double p) {
  const auto scaled = std::floor(p * static_cast<double>(ProbabilityReport::kBins));
  if (!(scaled > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(scaled), ProbabilityReport::kBins - 1);
}

namespace {

ProbabilitySummary summarize(std::vector<double> values) {
  ProbabilitySummary s;
  s.count = values.size();
  if (values.empty()) {
    s.mean = s.median = s.fraction_zero = s.fraction_above_040 = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  std::size_t zeros = 0, above = 0;
  for (double v : values) {
    sum += v;
    zeros += v == 0.0;
    above += v > 0.4;
  }
  const auto n = static_cast<double>(values.size());
  s.mean = sum / n;
  const auto mid = values.size() / 2;
  s.median = values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
  s.fraction_zero = static_cast<double>(zeros) / n;
  s.fraction_above_040 = static_cast<double>(above) / n;
  return s;
}

}  // namespace

ProbabilityReport probability_histogram(std::span<const JoinedPair> pairs, bool renormalize) {
  ProbabilityReport r;
  r.renormalized = renormalize;
  std::vector<double> agree, disagree, all;
  for (const auto& p : pairs) {
    const double prob = human_label_probability(p, renormalize);
    all.push_back(prob);
    if (p.agreement()) {
      agree.push_back(prob);
      ++r.agreement_hist[probability_bin(prob)];
    } else {
      disagree.push_back(prob);
      ++r.disagreement_hist[probability_bin(prob)];
    }
  }
  r.agreement = summarize(std::move(agree));
  r.disagreement = summarize(std::move(disagree));
  r.all = summarize(std::move(all));
  return r;
}

ReportSet build_reports(const JoinResult& join, const AnalysisOptions& options) {
  return {agreement_report(join, options.frame_order),
          length_bins(join.pairs, LengthGrouping::agreement, options.bins),
          length_bins(join.pairs, LengthGrouping::alternative_frame, options.bins),
          probability_histogram(join.pairs, options.renormalize)};
}

// ---------------------------------------------------------------------------
// Export

ExportFormat parse_export_format(std::string_view name) {
  if (name == "csv") return ExportFormat::csv;
  if (name == "json") return ExportFormat::json;
  throw std::invalid_argument("unknown export format '" + std::string(name) + "' (csv|json)");
}

namespace {

// Shortest round-trip decimal, identical to the JSON rendering.
std::string fmt(double v) {
  if (std::isnan(v)) return "";
  return Json(v).dump();
}

Json number_or_null(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

Json to_json(const ProbabilitySummary& s) {
  return Json{{"count", s.count},
              {"mean", number_or_null(s.mean)},
              {"median", number_or_null(s.median)},
              {"fraction_zero", number_or_null(s.fraction_zero)},
              {"fraction_above_0_4", number_or_null(s.fraction_above_040)}};
}

}  // namespace

std::string confusion_csv(const ConfusionMatrix& m) {
  std::string out;
  std::vector<std::string> header{"human\\machine"};
  for (Frame f : m.order) header.emplace_back(frame_label(f));
  out += csv::join_row(header) + "\n";
  for (std::size_t i = 0; i < kFrameCount; ++i) {
    std::vector<std::string> row{std::string(frame_label(m.order[i]))};
    for (std::size_t j = 0; j < kFrameCount; ++j) row.push_back(std::to_string(m.counts[i][j]));
    out += csv::join_row(row) + "\n";
  }
  return out;
}

std::string length_bins_csv(const LengthBinReport& r) {
  std::string out = csv::join_row({"normalization", "bin", r.group_names[0], r.group_names[1]}) + "\n";
  const auto n = r.bins.bin_count();
  for (std::size_t b = 0; b < n; ++b) {
    out += csv::join_row({"count", r.bins.label(b), std::to_string(r.counts[0][b]),
                          std::to_string(r.counts[1][b])}) + "\n";
  }
  for (std::size_t b = 0; b < n; ++b) {
    out += csv::join_row({"within_group", r.bins.label(b), fmt(r.within_group[0][b]),
                          fmt(r.within_group[1][b])}) + "\n";
  }
  for (std::size_t b = 0; b < n; ++b) {
    out += csv::join_row({"within_bin", r.bins.label(b), fmt(r.within_bin[0][b]),
                          fmt(r.within_bin[1][b])}) + "\n";
  }
  return out;
}

std::string probability_csv(const ProbabilityReport& r) {
  std::string out = "bin_lower,bin_upper,agreement,disagreement\n";
  for (std::size_t k = 0; k < ProbabilityReport::kBins; ++k) {
    out += csv::join_row({fmt(static_cast<double>(k) / ProbabilityReport::kBins),
                          fmt(static_cast<double>(k + 1) / ProbabilityReport::kBins),
                          std::to_string(r.agreement_hist[k]), std::to_string(r.disagreement_hist[k])}) +
           "\n";
  }
  return out;
}

Json to_json(const ConfusionMatrix& m) {
  Json order = Json::array();
  for (Frame f : m.order) order.push_back(frame_id(f));
  Json rows = Json::array();
  for (const auto& row : m.counts) rows.push_back(row);
  return Json{{"frame_order", order}, {"rows", "human"}, {"columns", "machine"}, {"counts", rows}};
}

Json to_json(const LengthBinReport& r) {
  Json labels = Json::array();
  for (std::size_t b = 0; b < r.bins.bin_count(); ++b) labels.push_back(r.bins.label(b));
  Json groups = Json::object();
  for (std::size_t g = 0; g < 2; ++g) {
    groups[r.group_names[g]] = {{"count", r.counts[g]},
                                {"within_group", r.within_group[g]},
                                {"within_bin", r.within_bin[g]}};
  }
  return Json{{"grouping", r.grouping == LengthGrouping::agreement ? "agreement" : "alternative_frame"},
              {"bin_width", r.bins.width},
              {"cap", r.bins.cap},
              {"bins", labels},
              {"groups", groups}};
}

Json to_json(const ProbabilityReport& r) {
  return Json{{"bin_width", ProbabilityReport::kBinWidth},
              {"renormalized", r.renormalized},
              {"agreement_histogram", r.agreement_hist},
              {"disagreement_histogram", r.disagreement_hist},
              {"agreement", to_json(r.agreement)},
              {"disagreement", to_json(r.disagreement)},
              {"all", to_json(r.all)}};
}

Json agreement_json(const ReportSet& reports) {
  const auto& a = reports.agreement;
  Json per_frame = Json::object();
  for (Frame f : kAllFrames) per_frame[std::string(frame_id(f))] = a.per_frame_agreement[frame_index(f)];
  return Json{{"n_joined", a.n_joined},
              {"n_unjoined_annotations", a.n_unjoined_annotations},
              {"n_unjoined_classifications", a.n_unjoined_classifications},
              {"accuracy", a.accuracy ? Json(*a.accuracy) : Json(nullptr)},
              {"per_frame_agreement", per_frame},
              {"confusion", to_json(a.confusion)},
              {"probability", to_json(reports.probability)}};
}

std::vector<std::filesystem::path> export_reports(const ReportSet& reports,
                                                  const std::filesystem::path& out_dir,
                                                  ExportFormat format) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("agreement.json", agreement_json(reports).dump(2) + "\n");
  if (format == ExportFormat::csv) {
    files.emplace_back("confusion.csv", confusion_csv(reports.agreement.confusion));
    files.emplace_back("length_bins.csv", length_bins_csv(reports.length));
    files.emplace_back("prob_hist.csv", probability_csv(reports.probability));
    files.emplace_back("alternatives_bins.csv", length_bins_csv(reports.alternatives));
  } else {
    files.emplace_back("confusion.json", to_json(reports.agreement.confusion).dump(2) + "\n");
    files.emplace_back("length_bins.json", to_json(reports.length).dump(2) + "\n");
    files.emplace_back("prob_hist.json", to_json(reports.probability).dump(2) + "\n");
    files.emplace_back("alternatives_bins.json", to_json(reports.alternatives).dump(2) + "\n");
  }
  if (reports.agreement.n_joined == 0 && format == ExportFormat::csv) {
    // Nothing joined: CSVs carry their header row only.
    for (auto& [name, content] : files) {
      if (name.ends_with(".csv")) content.erase(content.find('\n') + 1);
    }
  }
  std::vector<std::filesystem::path> written;
  for (const auto& [name, content] : files) {
    write_file_atomic(out_dir / name, content);
    written.push_back(out_dir / name);
  }
  return written;
}

}  // namespace frames
