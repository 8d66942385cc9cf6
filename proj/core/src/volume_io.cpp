#include "diffreg/volume_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace diffreg {

namespace {

constexpr char kMagic[4] = {'C', 'L', 'F', '1'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint32_t kMaxExtent = 1u << 16;

template <class T>
void put_le(std::uint8_t* dst, T value) {
  std::uint8_t tmp[sizeof(T)];
  std::memcpy(tmp, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(tmp, tmp + sizeof(T));
  std::memcpy(dst, tmp, sizeof(T));
}

template <class T>
T get_le(const std::uint8_t* src) {
  std::uint8_t tmp[sizeof(T)];
  std::memcpy(tmp, src, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(tmp, tmp + sizeof(T));
  T value;
  std::memcpy(&value, tmp, sizeof(T));
  return value;
}

Grid grid_from_header(const VolumeHeader& h, int time_steps) {
  std::vector<int> dims(h.dims.begin(), h.dims.end());
  try {
    return Grid(std::span<const int>(dims), time_steps);
  } catch (const std::invalid_argument& e) {
    throw VolumeError(VolumeError::Kind::bad_header, std::string("volume shape not usable: ") + e.what());
  }
}

VolumeHeader header_for(const Grid& g, int components, DType dtype) {
  VolumeHeader h;
  h.dtype = dtype;
  h.dim = g.dim();
  h.components = components;
  for (int a = 0; a < g.dim(); ++a) h.dims.push_back(static_cast<std::uint32_t>(g.extent(a)));
  return h;
}

void check_float(DType t) {
  if (t != DType::f32 && t != DType::f64) {
    throw VolumeError(VolumeError::Kind::dtype_mismatch, "expected a float volume, found " + to_string(t));
  }
}

template <std::floating_point Real>
void store_values(std::uint8_t* dst, std::span<const Real> values, DType dtype) {
  const std::size_t w = dtype_size(dtype);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (dtype == DType::f32) {
      put_le(dst + i * w, static_cast<float>(values[i]));
    } else {
      put_le(dst + i * w, static_cast<double>(values[i]));
    }
  }
}

template <std::floating_point Real>
void load_values(const std::uint8_t* src, std::span<Real> values, DType dtype) {
  const std::size_t w = dtype_size(dtype);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = dtype == DType::f32 ? static_cast<Real>(get_le<float>(src + i * w))
                                    : static_cast<Real>(get_le<double>(src + i * w));
  }
}

}  // namespace

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::f32: return 4;
    case DType::f64: return 8;
    case DType::i32: return 4;
  }
  throw std::invalid_argument("unknown dtype");
}

std::string to_string(DType t) {
  switch (t) {
    case DType::f32: return "f32";
    case DType::f64: return "f64";
    case DType::i32: return "i32";
  }
  return "unknown";
}

std::size_t VolumeHeader::voxels() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::size_t VolumeHeader::payload_bytes() const {
  return static_cast<std::size_t>(components) * voxels() * dtype_size(dtype);
}

std::vector<std::uint8_t> encode_volume(const RawVolume& vol) {
  const auto& h = vol.header;
  if (h.dims.size() != static_cast<std::size_t>(h.dim)) throw std::invalid_argument("encode_volume: dims rank");
  if (vol.payload.size() != h.payload_bytes()) throw std::invalid_argument("encode_volume: payload size");
  std::vector<std::uint8_t> out(h.header_bytes() + vol.payload.size());
  std::memcpy(out.data(), kMagic, 4);
  out[4] = kVersion;
  out[5] = static_cast<std::uint8_t>(h.dtype);
  out[6] = static_cast<std::uint8_t>(h.dim);
  out[7] = static_cast<std::uint8_t>(h.components);
  for (std::size_t a = 0; a < h.dims.size(); ++a) put_le(out.data() + 8 + 4 * a, h.dims[a]);
  std::copy(vol.payload.begin(), vol.payload.end(), out.begin() + static_cast<std::ptrdiff_t>(h.header_bytes()));
  return out;
}

RawVolume decode_volume(const std::vector<std::uint8_t>& bytes) {
  using K = VolumeError::Kind;
  if (bytes.size() < 8) throw VolumeError(K::truncated, "truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw VolumeError(K::bad_magic, "bad magic, not a CLF1 volume");
  if (bytes[4] != kVersion) throw VolumeError(K::bad_version, "unsupported version " + std::to_string(bytes[4]));
  RawVolume vol;
  auto& h = vol.header;
  const auto dt = bytes[5];
  if (dt < 1 || dt > 3) throw VolumeError(K::bad_header, "unknown dtype code " + std::to_string(dt));
  h.dtype = static_cast<DType>(dt);
  h.dim = bytes[6];
  if (h.dim != 2 && h.dim != 3) throw VolumeError(K::bad_header, "dimension must be 2 or 3");
  h.components = bytes[7];
  if (h.components != 1 && h.components != h.dim) throw VolumeError(K::bad_header, "components must be 1 or d");
  if (h.dtype == DType::i32 && h.components != 1) throw VolumeError(K::bad_header, "label volumes are scalar");
  if (bytes.size() < h.header_bytes()) throw VolumeError(K::truncated, "truncated header");
  for (int a = 0; a < h.dim; ++a) {
    const auto n = get_le<std::uint32_t>(bytes.data() + 8 + 4 * a);
    // the high bytes stay clear for any sane extent, so a byte-swapped
    // header shows up here
    if (n == 0 || n > kMaxExtent) {
      throw VolumeError(K::byte_order, "extent " + std::to_string(n) + " out of range, wrong byte order?");
    }
    h.dims.push_back(n);
  }
  const std::size_t need = h.header_bytes() + h.payload_bytes();
  if (bytes.size() < need) throw VolumeError(K::truncated, "truncated payload");
  if (bytes.size() > need) throw VolumeError(K::trailing_bytes, "trailing bytes after payload");
  vol.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(h.header_bytes()), bytes.end());
  return vol;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VolumeError(VolumeError::Kind::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw VolumeError(VolumeError::Kind::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw VolumeError(VolumeError::Kind::io, "write failed for " + path.string());
}

RawVolume read_raw_volume(const std::filesystem::path& path) { return decode_volume(read_file_bytes(path)); }

template <std::floating_point Real>
RawVolume raw_from_scalar(const ScalarField<Real>& f, DType dtype) {
  check_float(dtype);
  RawVolume vol{header_for(f.grid(), 1, dtype), {}};
  vol.payload.resize(vol.header.payload_bytes());
  store_values<Real>(vol.payload.data(), f.values(), dtype);
  return vol;
}

template <std::floating_point Real>
void write_volume(const std::filesystem::path& path, const ScalarField<Real>& f, DType dtype) {
  write_file_bytes(path, encode_volume(raw_from_scalar(f, dtype)));
}

template <std::floating_point Real>
void write_volume(const std::filesystem::path& path, const VectorField<Real>& v, DType dtype) {
  check_float(dtype);
  RawVolume vol{header_for(v.grid(), v.dim(), dtype), {}};
  vol.payload.resize(vol.header.payload_bytes());
  const std::size_t stride = v.grid().size() * dtype_size(dtype);
  for (int c = 0; c < v.dim(); ++c) {
    store_values<Real>(vol.payload.data() + static_cast<std::size_t>(c) * stride, v[c].values(), dtype);
  }
  write_file_bytes(path, encode_volume(vol));
}

void write_labels(const std::filesystem::path& path, const LabelVolume& labels) {
  RawVolume vol{header_for(labels.grid(), 1, DType::i32), {}};
  vol.payload.resize(vol.header.payload_bytes());
  for (std::size_t i = 0; i < labels.size(); ++i) put_le(vol.payload.data() + 4 * i, labels[i]);
  write_file_bytes(path, encode_volume(vol));
}

template <std::floating_point Real>
ScalarField<Real> scalar_from_raw(const RawVolume& raw, int time_steps) {
  check_float(raw.header.dtype);
  if (raw.header.components != 1) {
    throw VolumeError(VolumeError::Kind::shape_mismatch, "expected a scalar volume, found a vector volume");
  }
  ScalarField<Real> f(grid_from_header(raw.header, time_steps));
  load_values<Real>(raw.payload.data(), f.values(), raw.header.dtype);
  return f;
}

template <std::floating_point Real>
VectorField<Real> vector_from_raw(const RawVolume& raw, int time_steps) {
  check_float(raw.header.dtype);
  if (raw.header.components != raw.header.dim) {
    throw VolumeError(VolumeError::Kind::shape_mismatch, "expected a vector volume, found a scalar volume");
  }
  VectorField<Real> v(grid_from_header(raw.header, time_steps));
  const std::size_t stride = v.grid().size() * dtype_size(raw.header.dtype);
  for (int c = 0; c < v.dim(); ++c) {
    load_values<Real>(raw.payload.data() + static_cast<std::size_t>(c) * stride, v[c].values(), raw.header.dtype);
  }
  return v;
}

template <std::floating_point Real>
ScalarField<Real> read_scalar_volume(const std::filesystem::path& path, int time_steps) {
  return scalar_from_raw<Real>(read_raw_volume(path), time_steps);
}

template <std::floating_point Real>
VectorField<Real> read_vector_volume(const std::filesystem::path& path, int time_steps) {
  return vector_from_raw<Real>(read_raw_volume(path), time_steps);
}

LabelVolume read_labels(const std::filesystem::path& path) {
  const auto raw = read_raw_volume(path);
  if (raw.header.dtype != DType::i32) {
    throw VolumeError(VolumeError::Kind::dtype_mismatch, "expected an i32 label volume, found " +
                                                              to_string(raw.header.dtype));
  }
  const Grid g = grid_from_header(raw.header, 1);
  std::vector<std::int32_t> labels(g.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = get_le<std::int32_t>(raw.payload.data() + 4 * i);
  try {
    return LabelVolume(g, std::move(labels));
  } catch (const std::invalid_argument& e) {
    throw VolumeError(VolumeError::Kind::bad_header, e.what());
  }
}

#define DIFFREG_INSTANTIATE(Real)                                                                          \
  template RawVolume raw_from_scalar(const ScalarField<Real>&, DType);                                     \
  template void write_volume(const std::filesystem::path&, const ScalarField<Real>&, DType);              \
  template void write_volume(const std::filesystem::path&, const VectorField<Real>&, DType);              \
  template ScalarField<Real> scalar_from_raw(const RawVolume&, int);                                       \
  template VectorField<Real> vector_from_raw(const RawVolume&, int);                                       \
  template ScalarField<Real> read_scalar_volume(const std::filesystem::path&, int);                        \
  template VectorField<Real> read_vector_volume(const std::filesystem::path&, int);

DIFFREG_INSTANTIATE(float)
DIFFREG_INSTANTIATE(double)

}  // namespace diffreg
