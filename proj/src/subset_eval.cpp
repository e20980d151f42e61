// SPDX-License-Identifier: Apache-2.0
#include "hetgat/subset_eval.hpp"

#include <fstream>
#include <limits>

namespace hetgat {

double dice_score(const Matrix& predicted_labels, const Matrix& true_labels, int cls) {
  if (predicted_labels.rows() != true_labels.rows() ||
      predicted_labels.cols() != true_labels.cols()) {
    throw ConfigError("dice_score: label grids differ in shape");
  }
  long pred = 0;
  long truth = 0;
  long both = 0;
  for (long i = 0; i < true_labels.size(); ++i) {
    bool p = predicted_labels.data()[i] == cls;
    bool g = true_labels.data()[i] == cls;
    pred += p;
    truth += g;
    both += p && g;
  }
  if (pred + truth == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(pred + truth);
}

Matrix predicted_labels(const Matrix& probs, int grid_size) {
  if (probs.rows() != grid_size * grid_size) {
    throw ConfigError("predicted_labels: pixel count does not match the grid");
  }
  Matrix labels(grid_size, grid_size);
  for (int pix = 0; pix < probs.rows(); ++pix) {
    int best = 0;
    for (int c = 1; c < probs.cols(); ++c) {
      if (probs.at(pix, c) > probs.at(pix, best)) best = c;
    }
    labels.data()[pix] = best;
  }
  return labels;
}

const SubsetRow& SubsetReport::row_for(const ModalityMask& mask) const {
  for (const SubsetRow& row : rows) {
    if (row.mask.bits == mask.bits) return row;
  }
  throw ConfigError("subset report has no row for mask " + mask.to_string());
}

SubsetReport evaluate_subsets(const ParamBundle& params, const ModelConfig& cfg,
                              const Dataset& data) {
  cfg.validate();
  if (data.samples.empty()) throw ConfigError("evaluate_subsets: dataset is empty");
  if (data.config.grid_size != cfg.grid_size ||
      data.config.num_modalities != cfg.gat.num_modalities ||
      data.config.num_classes != cfg.num_classes) {
    throw ConfigError("evaluate_subsets: dataset geometry does not match the model");
  }

  int fg = cfg.num_classes - 1;
  SubsetReport report;
  report.mean_class.assign(static_cast<size_t>(fg), 0.0);
  for (const ModalityMask& mask : enumerate_subsets(cfg.gat.num_modalities)) {
    SubsetRow row;
    row.mask = mask;
    row.class_dice.assign(static_cast<size_t>(fg), 0.0);
    for (const Sample& sample : data.samples) {
      Matrix probs = predict_probs(params, cfg, sample, mask);
      Matrix labels = predicted_labels(probs, cfg.grid_size);
      for (int cls = 1; cls < cfg.num_classes; ++cls) {
        row.class_dice[static_cast<size_t>(cls - 1)] +=
            dice_score(labels, sample.labels, cls);
      }
    }
    for (double& d : row.class_dice) {
      d /= static_cast<double>(data.samples.size());
      row.mean += d;
    }
    row.mean /= fg;
    report.rows.push_back(std::move(row));
  }

  for (const SubsetRow& row : report.rows) {
    for (size_t c = 0; c < report.mean_class.size(); ++c) {
      report.mean_class[c] += row.class_dice[c];
    }
    report.grand_mean += row.mean;
  }
  for (double& d : report.mean_class) d /= static_cast<double>(report.rows.size());
  report.grand_mean /= static_cast<double>(report.rows.size());
  return report;
}

namespace {

void write_rows(std::ofstream& out, const SubsetReport& report, const char* sep,
                const char* mean_label) {
  for (const SubsetRow& row : report.rows) {
    out << row.mask.to_string();
    for (double d : row.class_dice) out << sep << d;
    out << sep << row.mean << "\n";
  }
  out << mean_label;
  for (double d : report.mean_class) out << sep << d;
  out << sep << report.grand_mean << "\n";
}

}  // namespace

void write_report_csv(const std::string& path, const SubsetReport& report) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out.precision(6);
  out << "available";
  for (size_t c = 0; c < report.mean_class.size(); ++c) {
    out << ",class" << c + 1;
  }
  out << ",mean\n";
  write_rows(out, report, ",", "Mean");
}

void write_report_text(const std::string& path, const SubsetReport& report) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out.precision(std::numeric_limits<double>::max_digits10);
  write_rows(out, report, " ", "Mean");
}

}  // namespace hetgat
