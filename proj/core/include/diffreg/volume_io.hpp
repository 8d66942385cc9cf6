#pragma once

#include <concepts>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffreg/field.hpp"
#include "diffreg/metrics.hpp"

namespace diffreg {

// Layout: "CLF1", version u8, dtype u8, d u8, components u8, d x u32 dims,
// then the payload, component-major, C-order, all little-endian.

enum class DType : std::uint8_t { f32 = 1, f64 = 2, i32 = 3 };

std::size_t dtype_size(DType t);
std::string to_string(DType t);

class VolumeError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, bad_version, bad_header, byte_order, truncated, trailing_bytes, dtype_mismatch,
                    shape_mismatch };
  VolumeError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct VolumeHeader {
  DType dtype = DType::f64;
  int dim = 2;
  int components = 1;
  std::vector<std::uint32_t> dims;

  std::size_t voxels() const;
  std::size_t payload_bytes() const;
  std::size_t header_bytes() const { return 8 + 4 * dims.size(); }
};

/// Raw decoded volume; `payload` holds exactly header.payload_bytes() bytes.
struct RawVolume {
  VolumeHeader header;
  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_volume(const RawVolume& vol);
RawVolume decode_volume(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

RawVolume read_raw_volume(const std::filesystem::path& path);

/// `dtype` must be f32 or f64; values are converted if it differs from Real.
template <std::floating_point Real>
void write_volume(const std::filesystem::path& path, const ScalarField<Real>& f, DType dtype);
template <std::floating_point Real>
void write_volume(const std::filesystem::path& path, const VectorField<Real>& v, DType dtype);
void write_labels(const std::filesystem::path& path, const LabelVolume& labels);

/// Float payloads of either width are accepted and converted to Real.
template <std::floating_point Real>
ScalarField<Real> read_scalar_volume(const std::filesystem::path& path, int time_steps = 4);
template <std::floating_point Real>
VectorField<Real> read_vector_volume(const std::filesystem::path& path, int time_steps = 4);
LabelVolume read_labels(const std::filesystem::path& path);

template <std::floating_point Real>
ScalarField<Real> scalar_from_raw(const RawVolume& raw, int time_steps = 4);
template <std::floating_point Real>
VectorField<Real> vector_from_raw(const RawVolume& raw, int time_steps = 4);
template <std::floating_point Real>
RawVolume raw_from_scalar(const ScalarField<Real>& f, DType dtype);

}  // namespace diffreg
