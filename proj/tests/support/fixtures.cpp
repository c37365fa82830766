#include "fixtures.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fixtures {

TempDir::TempDir(const std::string& tag) {
  static std::mt19937_64 salt{std::random_device{}()};
  path_ = std::filesystem::temp_directory_path() /
          ("clusterfdr_" + tag + "_" + std::to_string(salt()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

namespace {

template <typename T>
void put(std::vector<std::uint8_t>& buf, std::size_t offset, T value, bool big_endian) {
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if (big_endian) std::reverse(bytes, bytes + sizeof(T));
  if (buf.size() < offset + sizeof(T)) buf.resize(offset + sizeof(T), 0);
  std::memcpy(buf.data() + offset, bytes, sizeof(T));
}

int bitpix_of(std::int16_t datatype) {
  switch (datatype) {
    case 2: return 8;
    case 4: return 16;
    case 8: return 32;
    case 16: return 32;
    case 64: return 64;
    default: return 64;
  }
}

}  // namespace

std::vector<std::uint8_t> encode_nifti(const NiftiSpec& spec, const std::vector<double>& values) {
  std::vector<std::uint8_t> buf(348, 0);
  const bool be = spec.big_endian;
  put<std::int32_t>(buf, 0, 348, be);
  for (int i = 0; i < 8; ++i) put<std::int16_t>(buf, 40 + 2 * static_cast<std::size_t>(i), spec.dim[i], be);
  put<std::int16_t>(buf, 70, spec.datatype, be);
  put<std::int16_t>(buf, 72, static_cast<std::int16_t>(bitpix_of(spec.datatype)), be);
  for (int i = 0; i < 8; ++i) put<float>(buf, 76 + 4 * static_cast<std::size_t>(i), spec.pixdim[i], be);
  put<float>(buf, 108, spec.vox_offset, be);
  put<float>(buf, 112, spec.scl_slope, be);
  put<float>(buf, 116, spec.scl_inter, be);
  std::memcpy(buf.data() + 344, spec.magic.data(), std::min<std::size_t>(4, spec.magic.size()));
  buf.resize(static_cast<std::size_t>(spec.vox_offset), 0);

  std::size_t at = buf.size();
  for (double v : values) {
    switch (spec.datatype) {
      case 2: put<std::uint8_t>(buf, at, static_cast<std::uint8_t>(v), be); at += 1; break;
      case 4: put<std::int16_t>(buf, at, static_cast<std::int16_t>(v), be); at += 2; break;
      case 8: put<std::int32_t>(buf, at, static_cast<std::int32_t>(v), be); at += 4; break;
      case 16: put<float>(buf, at, static_cast<float>(v), be); at += 4; break;
      default: put<double>(buf, at, v, be); at += 8; break;
    }
  }
  return buf;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("fixture write failed: " + path.string());
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("fixture read failed: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("fixture read failed: " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("fixture write failed: " + path.string());
}

clusterfdr::SubjectStack random_stack(std::mt19937_64& rng, clusterfdr::Dims dims, std::size_t n,
                                      double shift) {
  std::normal_distribution<double> normal;
  std::vector<clusterfdr::Volume> subjects;
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> v(dims.size());
    for (auto& x : v) x = normal(rng) + shift;
    subjects.emplace_back(dims, std::move(v));
  }
  return clusterfdr::SubjectStack(std::move(subjects), clusterfdr::Mask::full(dims));
}

std::vector<std::vector<double>> stack_values(const clusterfdr::SubjectStack& stack) {
  std::vector<std::vector<double>> out;
  for (const auto& s : stack.subjects()) out.emplace_back(s.data().begin(), s.data().end());
  return out;
}

}  // namespace fixtures
