#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "clusterfdr/volume.hpp"

namespace fixtures {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct NiftiSpec {
  std::int16_t dim[8] = {3, 1, 1, 1, 1, 1, 1, 1};
  std::int16_t datatype = 16;
  float pixdim[8] = {1, 1, 1, 1, 1, 1, 1, 1};
  float vox_offset = 352.0f;
  float scl_slope = 0.0f;
  float scl_inter = 0.0f;
  std::string magic = std::string("n+1\0", 4);
  bool big_endian = false;
};

// Encodes values with the datatype in `spec`, independent of the library
// writer. Values are cast to the storage type.
std::vector<std::uint8_t> encode_nifti(const NiftiSpec& spec, const std::vector<double>& values);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// Stack of iid normal subjects (optionally with a per-subject offset) and a
// full mask.
clusterfdr::SubjectStack random_stack(std::mt19937_64& rng, clusterfdr::Dims dims, std::size_t n,
                                      double shift = 0.0);

// Flat list of volumes with one row per subject.
std::vector<std::vector<double>> stack_values(const clusterfdr::SubjectStack& stack);

}  // namespace fixtures
