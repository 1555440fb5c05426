/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "ktram/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ktram/errors.hpp"

namespace ktram {

std::vector<std::string> Dataset::label_vocabulary() const {
  std::vector<std::string> vocab;
  for (const std::string& label : labels) {
    if (std::find(vocab.begin(), vocab.end(), label) == vocab.end()) {
      vocab.push_back(label);
    }
  }
  return vocab;
}

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803u;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801u;

std::vector<std::uint8_t> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open file: " + path);
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

std::uint32_t read_u32_be(std::span<const std::uint8_t> bytes, std::size_t offset,
                          const std::string& path) {
  if (offset + 4 > bytes.size()) {
    throw DataError(path + ": truncated at byte " + std::to_string(bytes.size()) + " (needed " +
                    std::to_string(offset + 4) + ")");
  }
  return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
         (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
         static_cast<std::uint32_t>(bytes[offset + 3]);
}

void write_u32_be(std::ofstream& out, std::uint32_t value) {
  const char bytes[4] = {
      static_cast<char>(value >> 24),
      static_cast<char>(value >> 16),
      static_cast<char>(value >> 8),
      static_cast<char>(value),
  };
  out.write(bytes, 4);
}

std::string format_feature(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

} // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const std::vector<std::uint8_t> bytes = read_all(images_path);
  const std::uint32_t magic = read_u32_be(bytes, 0, images_path);
  if (magic != kIdxImagesMagic) {
    std::ostringstream msg;
    msg << images_path << ": bad magic 0x" << std::hex << magic << " at byte 0, expected 0x803"
        << " (unsigned-byte 3-D image container)";
    throw DataError(msg.str());
  }
  const std::uint32_t count = read_u32_be(bytes, 4, images_path);
  const std::uint32_t rows = read_u32_be(bytes, 8, images_path);
  const std::uint32_t cols = read_u32_be(bytes, 12, images_path);
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  const std::size_t expected = 16 + static_cast<std::size_t>(count) * pixels;
  if (bytes.size() < expected) {
    throw DataError(images_path + ": truncated at byte " + std::to_string(bytes.size()) +
                    ", header promises " + std::to_string(expected) + " bytes");
  }

  Dataset data;
  data.feature_dim = pixels;
  data.features.resize(static_cast<std::size_t>(count) * pixels);
  for (std::size_t i = 0; i < data.features.size(); ++i) {
    data.features[i] = static_cast<double>(bytes[16 + i]) / 255.0;
  }

  if (!labels_path.empty()) {
    const std::vector<std::uint8_t> label_bytes = read_all(labels_path);
    const std::uint32_t label_magic = read_u32_be(label_bytes, 0, labels_path);
    if (label_magic != kIdxLabelsMagic) {
      std::ostringstream msg;
      msg << labels_path << ": bad magic 0x" << std::hex << label_magic
          << " at byte 0, expected 0x801 (unsigned-byte label container)";
      throw DataError(msg.str());
    }
    const std::uint32_t label_count = read_u32_be(label_bytes, 4, labels_path);
    if (label_count != count) {
      throw DataError(labels_path + ": label count " + std::to_string(label_count) +
                      " does not match image count " + std::to_string(count));
    }
    if (label_bytes.size() < 8 + static_cast<std::size_t>(label_count)) {
      throw DataError(labels_path + ": truncated at byte " + std::to_string(label_bytes.size()) +
                      ", header promises " + std::to_string(8 + label_count) + " bytes");
    }
    data.labels.reserve(label_count);
    for (std::uint32_t i = 0; i < label_count; ++i) {
      data.labels.push_back(std::to_string(label_bytes[8 + i]));
    }
  }
  return data;
}

void write_idx(const Dataset& data, const std::string& images_path,
               const std::string& labels_path, std::uint32_t rows, std::uint32_t cols) {
  if (rows == 0 || cols == 0) {
    const auto side = static_cast<std::uint32_t>(std::lround(std::sqrt(
        static_cast<double>(data.feature_dim))));
    if (static_cast<std::size_t>(side) * side != data.feature_dim) {
      throw std::invalid_argument("feature_dim is not square, pass explicit rows/cols");
    }
    rows = cols = side;
  }
  if (static_cast<std::size_t>(rows) * cols != data.feature_dim) {
    throw std::invalid_argument("rows*cols does not match feature_dim");
  }

  std::ofstream images(images_path, std::ios::binary);
  if (!images) {
    throw DataError("cannot write file: " + images_path);
  }
  write_u32_be(images, kIdxImagesMagic);
  write_u32_be(images, static_cast<std::uint32_t>(data.size()));
  write_u32_be(images, rows);
  write_u32_be(images, cols);
  for (double value : data.features) {
    const auto byte = static_cast<std::uint8_t>(
        std::clamp(std::lround(value * 255.0), 0L, 255L));
    images.put(static_cast<char>(byte));
  }

  if (!labels_path.empty()) {
    if (!data.labeled()) {
      throw std::invalid_argument("dataset has no labels to write");
    }
    std::ofstream labels(labels_path, std::ios::binary);
    if (!labels) {
      throw DataError("cannot write file: " + labels_path);
    }
    write_u32_be(labels, kIdxLabelsMagic);
    write_u32_be(labels, static_cast<std::uint32_t>(data.size()));
    for (const std::string& label : data.labels) {
      int value = 0;
      try {
        value = std::stoi(label);
      } catch (const std::exception&) {
        throw std::invalid_argument("label '" + label + "' is not an IDX byte label");
      }
      if (value < 0 || value > 255) {
        throw std::invalid_argument("label '" + label + "' outside byte range");
      }
      labels.put(static_cast<char>(value));
    }
  }
}

Dataset load_csv(const std::string& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open file: " + path);
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  bool any_label = false;
  std::size_t columns = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (has_header && line_no == 1) {
      continue;
    }

    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos
                                                                     : comma - start));
      if (comma == std::string::npos) {
        break;
      }
      start = comma + 1;
    }
    if (fields.size() < 2) {
      throw DataError(path + " row " + std::to_string(line_no) +
                      ": expected at least one feature column plus a label column");
    }
    if (columns == 0) {
      columns = fields.size();
    } else if (fields.size() != columns) {
      throw DataError(path + " row " + std::to_string(line_no) + ": ragged row with " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(columns));
    }

    std::vector<double> row(columns - 1);
    for (std::size_t i = 0; i + 1 < columns; ++i) {
      try {
        std::size_t consumed = 0;
        row[i] = std::stod(fields[i], &consumed);
        if (consumed != fields[i].size()) {
          throw std::invalid_argument("trailing characters");
        }
      } catch (const std::exception&) {
        throw DataError(path + " row " + std::to_string(line_no) + ": non-numeric feature '" +
                        fields[i] + "' in column " + std::to_string(i + 1));
      }
    }
    rows.push_back(std::move(row));
    labels.push_back(fields.back());
    any_label = any_label || !fields.back().empty();
  }
  if (rows.empty()) {
    throw DataError(path + ": no data rows");
  }

  Dataset data;
  data.feature_dim = columns - 1;
  data.features.resize(rows.size() * data.feature_dim);

  // Per-column min-max normalization; constant columns collapse to 0.
  for (std::size_t column = 0; column < data.feature_dim; ++column) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
      lo = std::min(lo, row[column]);
      hi = std::max(hi, row[column]);
    }
    const double span = hi - lo;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      data.features[i * data.feature_dim + column] =
          (span > 0.0) ? (rows[i][column] - lo) / span : 0.0;
    }
  }
  if (any_label) {
    data.labels = std::move(labels);
  }
  return data;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write file: " + path);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto sample = data.sample(i);
    for (std::size_t j = 0; j < sample.size(); ++j) {
      out << format_feature(sample[j]) << ",";
    }
    out << (data.labeled() ? data.labels[i] : "") << "\n";
  }
}

SpikeSet encode_threshold(std::span<const double> sample, const EncoderConfig& config) {
  if (!(config.theta >= 0.0 && config.theta <= 1.0)) {
    throw std::invalid_argument("theta must be in [0, 1]");
  }
  std::vector<Address> active;
  if (config.include_bias) {
    active.push_back(0);
  }
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (sample[i] > config.theta) {
      active.push_back(static_cast<Address>(i + 1));
    }
  }
  return SpikeSet(std::move(active));
}

std::uint64_t Metrics::total() const {
  std::uint64_t sum = 0;
  for (const auto& row : confusion) {
    for (std::uint64_t cell : row) {
      sum += cell;
    }
  }
  return sum;
}

namespace {

struct Stroke {
  double r0, c0, r1, c1;
};

const std::vector<Stroke>& glyph_strokes(int digit) {
  static const std::vector<Stroke> glyphs[10] = {
      /*0*/ {{5, 10, 5, 17}, {5, 17, 22, 17}, {22, 17, 22, 10}, {22, 10, 5, 10}},
      /*1*/ {{8, 11, 5, 14}, {5, 14, 22, 14}, {22, 11, 22, 17}},
      /*2*/ {{7, 10, 5, 14}, {5, 14, 11, 17}, {11, 17, 22, 10}, {22, 10, 22, 18}},
      /*3*/ {{5, 10, 5, 17}, {5, 17, 13, 13}, {13, 13, 22, 17}, {22, 17, 22, 10}},
      /*4*/ {{5, 15, 14, 9}, {14, 9, 14, 19}, {5, 17, 22, 17}},
      /*5*/ {{5, 18, 5, 10}, {5, 10, 12, 10}, {12, 10, 13, 17}, {13, 17, 21, 17}, {21, 17, 22, 9}},
      /*6*/ {{5, 16, 12, 10}, {12, 10, 22, 10}, {22, 10, 22, 17}, {22, 17, 15, 17}, {15, 17, 14, 11}},
      /*7*/ {{5, 9, 5, 18}, {5, 18, 22, 12}},
      /*8*/
      {{12, 13, 6, 9}, {6, 9, 5, 14}, {5, 14, 12, 15}, {12, 15, 22, 11}, {22, 11, 22, 17}, {22, 17, 12, 13}},
      /*9*/ {{13, 16, 6, 16}, {6, 16, 5, 10}, {5, 10, 12, 10}, {12, 10, 13, 16}, {13, 16, 21, 13}},
  };
  return glyphs[digit];
}

} // namespace

Dataset synthetic_digits(std::size_t count, std::uint64_t seed) {
  constexpr int kSide = 28;
  constexpr int kPixels = kSide * kSide;
  Dataset data;
  data.feature_dim = kPixels;
  data.features.assign(count * kPixels, 0.0);
  data.labels.reserve(count);
  RandomStream rng(seed);

  for (std::size_t image = 0; image < count; ++image) {
    const int digit = static_cast<int>(rng.next_unit() * 10.0) % 10;
    data.labels.push_back(std::to_string(digit));
    const double dx = rng.next_uniform(-2.0, 2.0);
    const double dy = rng.next_uniform(-2.0, 2.0);
    const double intensity = rng.next_uniform(0.75, 1.0);
    const double radius = rng.next_uniform(0.9, 1.5);
    double* img = &data.features[image * kPixels];

    // Rasterize each stroke with a round brush.
    for (const Stroke& stroke : glyph_strokes(digit)) {
      const double steps =
          std::max(std::abs(stroke.r1 - stroke.r0), std::abs(stroke.c1 - stroke.c0)) * 2 + 1;
      for (int t = 0; t <= static_cast<int>(steps); ++t) {
        const double f = t / steps;
        const double r = stroke.r0 + f * (stroke.r1 - stroke.r0) + dy;
        const double c = stroke.c0 + f * (stroke.c1 - stroke.c0) + dx;
        const int r_lo = std::max(0, static_cast<int>(std::floor(r - radius)));
        const int r_hi = std::min(kSide - 1, static_cast<int>(std::ceil(r + radius)));
        const int c_lo = std::max(0, static_cast<int>(std::floor(c - radius)));
        const int c_hi = std::min(kSide - 1, static_cast<int>(std::ceil(c + radius)));
        for (int rr = r_lo; rr <= r_hi; ++rr) {
          for (int cc = c_lo; cc <= c_hi; ++cc) {
            const double d2 = (rr - r) * (rr - r) + (cc - c) * (cc - c);
            if (d2 <= radius * radius) {
              img[rr * kSide + cc] = intensity;
            }
          }
        }
      }
    }

    // Pixel dropout, salt noise, low-level background noise.
    for (int p = 0; p < kPixels; ++p) {
      if (img[p] > 0.0 && rng.next_unit() < 0.04) {
        img[p] = 0.0;
      } else if (img[p] == 0.0 && rng.next_unit() < 0.002) {
        img[p] = rng.next_uniform(0.55, 0.9);
      } else {
        img[p] = std::clamp(img[p] + rng.next_uniform(-0.15, 0.15), 0.0, 1.0);
      }
    }
  }
  return data;
}

Metrics compute_metrics(std::span<const std::string> truth,
                        std::span<const std::string> predicted) {
  if (truth.size() != predicted.size() || truth.empty()) {
    throw std::invalid_argument("truth and prediction sequences must align and be non-empty");
  }
  Metrics metrics;
  auto index_of = [&metrics](const std::string& label) {
    const auto it = std::find(metrics.labels.begin(), metrics.labels.end(), label);
    if (it != metrics.labels.end()) {
      return static_cast<std::size_t>(it - metrics.labels.begin());
    }
    metrics.labels.push_back(label);
    return metrics.labels.size() - 1;
  };
  for (std::size_t i = 0; i < truth.size(); ++i) {
    index_of(truth[i]);
    index_of(predicted[i]);
  }
  const std::size_t n = metrics.labels.size();
  metrics.confusion.assign(n, std::vector<std::uint64_t>(n, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    metrics.confusion[index_of(truth[i])][index_of(predicted[i])] += 1;
  }

  std::uint64_t diagonal = 0;
  for (std::size_t i = 0; i < n; ++i) {
    diagonal += metrics.confusion[i][i];
  }
  metrics.accuracy = static_cast<double>(diagonal) / static_cast<double>(truth.size());

  metrics.precision.assign(n, 0.0);
  metrics.recall.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t row_sum = 0;
    std::uint64_t col_sum = 0;
    for (std::size_t j = 0; j < n; ++j) {
      row_sum += metrics.confusion[i][j];
      col_sum += metrics.confusion[j][i];
    }
    metrics.recall[i] = row_sum ? static_cast<double>(metrics.confusion[i][i]) / row_sum : 0.0;
    metrics.precision[i] = col_sum ? static_cast<double>(metrics.confusion[i][i]) / col_sum : 0.0;
  }
  return metrics;
}

} // namespace ktram
