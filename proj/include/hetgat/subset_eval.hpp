// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "hetgat/data.hpp"
#include "hetgat/segmentation.hpp"

namespace hetgat {

// Overlap score of one class between a predicted and a true label grid,
// 2|P∩G| / (|P| + |G|) over hard assignments; 1.0 when the class appears in
// neither grid.
double dice_score(const Matrix& predicted_labels, const Matrix& true_labels, int cls);

// Argmax class per pixel, as an S x S grid of class ids.
Matrix predicted_labels(const Matrix& probs, int grid_size);

struct SubsetRow {
  ModalityMask mask;
  std::vector<double> class_dice;  // classes 1..L-1, averaged over samples
  double mean = 0.0;               // mean of class_dice
};

// One Dice row per non-empty availability subset, ordered smallest subsets
// first, plus a closing arithmetic-mean row over the subsets.
struct SubsetReport {
  std::vector<SubsetRow> rows;
  std::vector<double> mean_class;
  double grand_mean = 0.0;

  const SubsetRow& row_for(const ModalityMask& mask) const;
};

SubsetReport evaluate_subsets(const ParamBundle& params, const ModelConfig& cfg,
                              const Dataset& data);

// Comma-separated table with a header, six significant digits.
void write_report_csv(const std::string& path, const SubsetReport& report);
// Structured text mirror at full precision, one "mask ... dice ..." line per row.
void write_report_text(const std::string& path, const SubsetReport& report);

}  // namespace hetgat
