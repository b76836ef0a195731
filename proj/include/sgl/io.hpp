#pragma once

#include "sgl/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace sgl {

struct Dataset {
  Matrix<double> X;
  /// 0-based ids, compacted in order of first appearance.
  std::optional<Labeling> truth;
};

enum class DataFormat {
  /// Comma separated, optional header; a final header column named "label"
  /// holds ground truth.
  csv,
  /// Whitespace separated numbers, no header; ground truth optionally from
  /// a sidecar file with one label per line.
  dense,
};

DataFormat parse_format(const std::string& name);

Dataset load_dataset(const std::filesystem::path& path, DataFormat format = DataFormat::csv,
                     const std::optional<std::filesystem::path>& labels_path = std::nullopt);

/// Parses CSV text; `source` names the input in error messages.
Dataset parse_csv(std::istream& in, const std::string& source = "<stream>");

/// Writes CSV with header f1..fm and a trailing label column when present.
void write_csv(const Dataset& data, const std::filesystem::path& path);

enum class SynthKind { blobs, rings, moons };

SynthKind parse_synth_kind(const std::string& name);

struct SynthOptions {
  SynthKind kind = SynthKind::blobs;
  int n = 150;
  std::uint64_t seed = 1;
  /// Blob count (blobs only; rings and moons always have two classes).
  int classes = 3;
  /// Gaussian noise; negative selects the default for the kind.
  double noise = -1;
  /// Distance between neighboring blob centers.
  double separation = 5.0;
};

/// Blobs: centers on a circle, neighbors `separation` apart, isotropic noise
/// (default 0.1). Rings: radii 1 and 3, radial noise (default 0.05).
/// Moons: two interleaved half circles (default noise 0.05).
Dataset make_synthetic(const SynthOptions& opts);

}  // namespace sgl
