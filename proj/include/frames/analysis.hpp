#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frames/annotation.hpp"
#include "frames/classifier.hpp"
#include "frames/distribution.hpp"
#include "frames/frame.hpp"

namespace frames {

struct JoinedPair {
  std::string item_id;
  std::string annotator_id;
  std::string model_id;
  Frame human = Frame::AttributionOfResponsibility;
  std::optional<Frame> human_alternative;
  FrameDistribution machine;
  std::size_t word_count = 0;  // of the text shown to the annotator when known

  bool agreement() const noexcept { return human == machine.predominant; }
};

struct JoinResult {
  std::vector<JoinedPair> pairs;
  std::size_t n_unjoined_annotations = 0;
  std::size_t n_unjoined_classifications = 0;
};

// Inner join on item_id after keeping the latest annotation per
// (item, annotator) and the latest classification per (item, model).
// "Latest" is the later position in the input, matching append-only stores.
JoinResult join_records(std::span<const Annotation> annotations,
                        std::span<const ClassificationRecord> classifications);

// Rows are the human main frame, columns the machine's predominant frame,
// both in `order`.
struct ConfusionMatrix {
  FrameOrder order = kDefaultFrameOrder;
  std::array<std::array<std::size_t, kFrameCount>, kFrameCount> counts{};

  std::size_t at(Frame human, Frame machine) const;
  std::size_t& at(Frame human, Frame machine);
  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(Frame human) const;
  std::size_t column_sum(Frame machine) const;
};

ConfusionMatrix tally_confusion(std::span<const JoinedPair> pairs,
                                const FrameOrder& order = kDefaultFrameOrder);

class EmptyJoin : public FramesError {
 public:
  EmptyJoin() : FramesError("EmptyJoin", "accuracy is undefined on zero joined pairs") {}
};

struct AgreementReport {
  ConfusionMatrix confusion;
  std::optional<double> accuracy;  // empty only for a report built from no pairs
  PerFrame<std::size_t> per_frame_agreement{};
  std::size_t n_joined = 0;
  std::size_t n_unjoined_annotations = 0;
  std::size_t n_unjoined_classifications = 0;
};

// Throws EmptyJoin on zero pairs.
AgreementReport confusion_and_accuracy(std::span<const JoinedPair> pairs,
                                       const FrameOrder& order = kDefaultFrameOrder);

// Like confusion_and_accuracy, but accepts an empty join (accuracy unset) and
// carries the unjoined counts.
AgreementReport agreement_report(const JoinResult& join,
                                 const FrameOrder& order = kDefaultFrameOrder);

// Word-count bins [0, w), [w, 2w), ..., [cap - w, cap), [cap, inf).
struct BinSpec {
  std::size_t width = 100;
  std::size_t cap = 800;

  void validate() const;  // width > 0, cap a positive multiple of width
  std::size_t bin_count() const { return cap / width + 1; }
  std::size_t bin_of(std::size_t words) const;
  std::string label(std::size_t bin) const;  // "100-199", "800+"
};

enum class LengthGrouping { agreement, alternative_frame };

struct LengthBinReport {
  LengthGrouping grouping = LengthGrouping::agreement;
  BinSpec bins;
  std::array<std::string, 2> group_names;
  std::array<std::vector<std::size_t>, 2> counts;
  // Each nonempty group's bins sum to 1.
  std::array<std::vector<double>, 2> within_group;
  // Each nonempty bin's two groups sum to 1; empty bins are all zero.
  std::array<std::vector<double>, 2> within_bin;

  std::size_t total() const;
};

// Groups are (agreement, disagreement) or (with_alternative, without_alternative).
LengthBinReport length_bins(std::span<const JoinedPair> pairs, LengthGrouping grouping,
                            const BinSpec& bins = {});

struct ProbabilitySummary {
  std::size_t count = 0;
  double mean = 0.0;  // NaN when count == 0, likewise below
  double median = 0.0;
  double fraction_zero = 0.0;
  double fraction_above_040 = 0.0;
};

struct ProbabilityReport {
  static constexpr std::size_t kBins = 20;  // width 0.05 over [0, 1]
  static constexpr double kBinWidth = 0.05;

  bool renormalized = false;
  std::array<std::size_t, kBins> agreement_hist{};
  std::array<std::size_t, kBins> disagreement_hist{};
  ProbabilitySummary agreement;
  ProbabilitySummary disagreement;
  ProbabilitySummary all;
};

// The machine's probability for the human's main frame. With `renormalize`
// the five frame masses are rescaled to sum to 1 first.
double human_label_probability(const JoinedPair& pair, bool renormalize = false);

// Bins are [k/20, (k+1)/20) except the last, which is closed.
std::size_t probability_bin(double p);

ProbabilityReport probability_histogram(std::span<const JoinedPair> pairs, bool renormalize = false);

struct ReportSet {
  AgreementReport agreement;
  LengthBinReport length;
  LengthBinReport alternatives;
  ProbabilityReport probability;
};

struct AnalysisOptions {
  BinSpec bins;
  bool renormalize = false;
  FrameOrder frame_order = kDefaultFrameOrder;
};

ReportSet build_reports(const JoinResult& join, const AnalysisOptions& options = {});

enum class ExportFormat { csv, json };

ExportFormat parse_export_format(std::string_view name);

// csv:  confusion.csv, agreement.json, length_bins.csv, prob_hist.csv, alternatives_bins.csv
// json: confusion.json, agreement.json, length_bins.json, prob_hist.json, alternatives_bins.json
// Each file is replaced atomically. Returns the written paths.
std::vector<std::filesystem::path> export_reports(const ReportSet& reports,
                                                  const std::filesystem::path& out_dir,
                                                  ExportFormat format);

// Individual renderers (also used by tests).
std::string confusion_csv(const ConfusionMatrix& m);
std::string length_bins_csv(const LengthBinReport& r);
std::string probability_csv(const ProbabilityReport& r);
Json agreement_json(const ReportSet& reports);
Json to_json(const LengthBinReport& r);
Json to_json(const ProbabilityReport& r);
Json to_json(const ConfusionMatrix& m);

}  // namespace frames
