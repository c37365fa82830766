#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace clusterfdr {

struct Coord {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t z = 0;

  friend bool operator==(const Coord&, const Coord&) = default;
};

// Grid extent. Linear index is x-fastest: index = x + nx * (y + ny * z).
struct Dims {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;

  std::size_t size() const noexcept { return nx * ny * nz; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return x + nx * (y + ny * z);
  }
  std::size_t index(const Coord& c) const noexcept { return index(c.x, c.y, c.z); }
  Coord coord(std::size_t index) const noexcept {
    return {index % nx, (index / nx) % ny, index / (nx * ny)};
  }

  friend bool operator==(const Dims&, const Dims&) = default;
};

enum class DataType : std::uint8_t { uint8, int16, int32, float32, float64 };

using VoxelSize = std::array<double, 3>;

// Immutable 3D scalar grid. Construction validates that the data length
// matches the dims and that every value is finite.
class Volume {
 public:
  Volume(Dims dims, std::vector<double> data, VoxelSize voxel_size = {1.0, 1.0, 1.0},
         DataType origin = DataType::float64);

  // Zero-filled volume.
  static Volume zeros(Dims dims, VoxelSize voxel_size = {1.0, 1.0, 1.0});

  const Dims& dims() const noexcept { return dims_; }
  const VoxelSize& voxel_size() const noexcept { return voxel_size_; }
  DataType datatype_origin() const noexcept { return origin_; }
  std::span<const double> data() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }

  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return data_[dims_.index(x, y, z)];
  }

  // Releases the buffer; the volume is left empty.
  std::vector<double> take_data() && { return std::move(data_); }

 private:
  Dims dims_;
  VoxelSize voxel_size_;
  std::vector<double> data_;
  DataType origin_;
};

class Mask {
 public:
  // Throws EmptyMask when no voxel is inside.
  Mask(Dims dims, std::vector<std::uint8_t> inside);

  static Mask full(Dims dims);

  const Dims& dims() const noexcept { return dims_; }
  bool inside(std::size_t i) const noexcept { return inside_[i] != 0; }
  std::span<const std::uint8_t> flags() const noexcept { return inside_; }
  std::size_t count() const noexcept { return count_; }

 private:
  Dims dims_;
  std::vector<std::uint8_t> inside_;
  std::size_t count_ = 0;
};

// N >= 2 aligned subject volumes plus the common analysis mask.
class SubjectStack {
 public:
  SubjectStack(std::vector<Volume> subjects, Mask mask);

  const std::vector<Volume>& subjects() const noexcept { return subjects_; }
  const Mask& mask() const noexcept { return mask_; }
  const Dims& dims() const noexcept { return mask_.dims(); }
  std::size_t n() const noexcept { return subjects_.size(); }

 private:
  std::vector<Volume> subjects_;
  Mask mask_;
};

// NIfTI-1 single-file (.nii) subset: uncompressed, 3D, datatypes
// uint8/int16/int32/float32/float64, either byte order.
Volume load_nifti(const std::filesystem::path& path);

// Writes float32, native byte order, vox_offset 352, scl_slope 1.
void write_nifti(const Volume& volume, const std::filesystem::path& path);

// Raw sidecar pair: `<stem>.f32raw` (little-endian float32, x-fastest) and
// `<stem>.json` holding {"dims":[nx,ny,nz],"voxel_size":[dx,dy,dz]}.
// `path` may name either file or the common stem.
Volume load_raw(const std::filesystem::path& path);
void write_raw(const Volume& volume, const std::filesystem::path& stem);

// Dispatches on extension: .nii -> NIfTI, .f32raw/.json -> raw sidecar.
Volume load_volume(const std::filesystem::path& path);

// inside = value > threshold (strict).
Mask mask_from_volume(const Volume& volume, double threshold = 0.0);
Mask load_mask(const std::filesystem::path& path, double threshold = 0.0);

// CSV mask list: header `x,y,z`, one inside voxel per row.
Mask load_mask_csv(const std::filesystem::path& path, Dims dims);
void write_mask_csv(const Mask& mask, const std::filesystem::path& path);

}  // namespace clusterfdr
