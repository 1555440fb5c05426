/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef KTRAM_DATASET_HPP
#define KTRAM_DATASET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ktram/core.hpp"

namespace ktram {

/**
 * An in-memory dataset: dense feature vectors normalized to [0,1], with an
 * optional label per sample.
 */
struct Dataset {
  std::size_t feature_dim = 0;
  std::vector<double> features;    ///< row-major, size() * feature_dim
  std::vector<std::string> labels; ///< empty when unlabeled, else one per sample

  std::size_t size() const { return feature_dim == 0 ? 0 : features.size() / feature_dim; }
  bool labeled() const { return !labels.empty(); }
  std::span<const double> sample(std::size_t index) const {
    return std::span<const double>(features).subspan(index * feature_dim, feature_dim);
  }
  /// Distinct labels in first-appearance order.
  std::vector<std::string> label_vocabulary() const;
};

/**
 * Loads a big-endian IDX image file (magic 0x00000803, dims count x rows x
 * cols, unsigned bytes scaled to [0,1]). When `labels_path` is non-empty the
 * matching label file (magic 0x00000801) is loaded and zipped 1:1.
 * Malformed input raises DataError naming the byte offset.
 */
Dataset load_idx(const std::string& images_path, const std::string& labels_path = "");

/// Writes a dataset back out as an IDX image/label file pair (images as
/// rounded bytes). Feature dim must be a perfect square or `rows`/`cols`
/// must be given.
void write_idx(const Dataset& data, const std::string& images_path,
               const std::string& labels_path, std::uint32_t rows = 0, std::uint32_t cols = 0);

/**
 * Loads a CSV file: last column is the label token, the remaining columns are
 * numeric features min-max normalized per column (constant columns normalize
 * to 0). Empty label tokens throughout produce an unlabeled dataset. Ragged
 * rows and non-numeric features raise DataError naming the row.
 */
Dataset load_csv(const std::string& path, bool has_header);

/// Writes features plus label column; reloading reproduces the dataset
/// (normalization is idempotent).
void write_csv(const Dataset& data, const std::string& path);

/**
 * Threshold encoder configuration. Address 0 is the always-on bias address;
 * feature i maps to address i + 1.
 */
struct EncoderConfig {
  double theta = 0.5;
  bool include_bias = true;
};

/**
 * Spike encoding: {i + 1 : sample[i] > theta}, plus the bias address 0 when
 * include_bias is set. An all-zero sample with the bias disabled yields an
 * empty set, which downstream execution rejects.
 */
SpikeSet encode_threshold(std::span<const double> sample, const EncoderConfig& config);

/// Classification quality summary over a labeled dataset.
struct Metrics {
  std::vector<std::string> labels; ///< row/column order of the confusion matrix
  std::vector<std::vector<std::uint64_t>> confusion; ///< [true][predicted]
  double accuracy = 0.0;
  std::vector<double> precision; ///< per label, 0 when undefined
  std::vector<double> recall;    ///< per label, 0 when undefined

  std::uint64_t total() const;
};

/// Builds metrics from aligned truth/prediction sequences.
Metrics compute_metrics(std::span<const std::string> truth,
                        std::span<const std::string> predicted);

/**
 * Deterministic synthetic digit images for reproducible benchmark runs when
 * no external corpus is on hand: stroke-drawn glyphs '0'..'9' on a 28x28
 * canvas with random translation, stroke width, intensity, pixel dropout and
 * background noise. Same (count, seed) always yields the same dataset.
 */
Dataset synthetic_digits(std::size_t count, std::uint64_t seed);

} // namespace ktram

#endif // KTRAM_DATASET_HPP
