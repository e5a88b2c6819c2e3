#pragma once

#include <stdexcept>
#include <string>

#include "hjnav/mlp.hpp"
#include "hjnav/scaling.hpp"

namespace hjnav {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CheckpointVersionError : CheckpointError {
  using CheckpointError::CheckpointError;
};
struct CheckpointFormatError : CheckpointError {
  using CheckpointError::CheckpointError;
};
struct CheckpointShapeError : CheckpointError {
  using CheckpointError::CheckpointError;
};

struct Checkpoint {
  NetParams params;
  InputScaler scaler;
};

/// Binary checkpoint, little-endian throughout:
///   magic "MADP" | u16 version | u32 layer count | per layer (u32 in, u32 out)
///   | f64 omega0 | u32 input_dim | input_dim x (f64 offset, f64 scale)
///   | f64 clamp_lo, f64 clamp_hi
///   | per layer: weights row-major (out x in) then bias, all f64.
/// Round trips are bit-exact. Writes go to a temp file renamed into place.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

/// Throws CheckpointFormatError on corrupt/truncated input,
/// CheckpointVersionError on unsupported version, CheckpointShapeError on
/// inconsistent shape metadata.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hjnav
