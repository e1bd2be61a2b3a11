#pragma once

// Sample-level comparison of detected patterns against ground-truth segments.
//
// Only samples that carry a predicted case id are counted. For a pattern
// matched to truth segment k, its samples inside k are true positives, its
// samples inside any other truth segment are false positives, and its samples
// outside every truth segment are false negatives. Samples of an unmatched
// pattern are all false negatives.

#include "caseseg/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace caseseg {

OverlapMatrix overlap_matrix(const std::vector<LabelSegment>& truth,
                             const std::vector<Pattern>& pred, std::size_t length);

// Greedy one-to-one matching on the largest remaining cell; ties go to the
// lowest truth id, then the lowest pred id. Zero cells are never matched.
std::vector<Match> match_labels(const OverlapMatrix& overlap);

ConfusionCounts confusion_counts(const std::vector<LabelSegment>& truth,
                                 const std::vector<Pattern>& pred,
                                 const std::vector<Match>& matching, std::size_t length);

Metrics metrics(const ConfusionCounts& counts);

// overlap_matrix -> match_labels -> confusion_counts -> metrics.
EvalReport evaluate(const std::vector<LabelSegment>& truth, const std::vector<Pattern>& pred,
                    std::size_t length);

// Heatmap of truth rows (cycle_EX) against predicted columns (cycle_TS).
std::string heatmap_csv(const OverlapMatrix& overlap);
std::string heatmap_svg(const OverlapMatrix& overlap);
// Writes <stem>.csv and <stem>.svg. Throws IoError.
void heatmap_export(const OverlapMatrix& overlap, const std::filesystem::path& stem);

// Label file: header id,start,end,kind.
std::vector<LabelSegment> read_labels_csv(std::istream& in);
std::vector<LabelSegment> read_labels_file(const std::filesystem::path& path);
void write_labels_csv(std::ostream& out, const std::vector<LabelSegment>& labels);

}  // namespace caseseg
