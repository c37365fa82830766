#include "clusterfdr/volume.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "clusterfdr/csv.hpp"
#include "clusterfdr/error.hpp"

namespace clusterfdr {

namespace {

constexpr std::int32_t kNiftiHeaderSize = 348;
constexpr std::size_t kNiftiVoxOffset = 352;

std::string dims_string(const Dims& d) {
  return "(" + std::to_string(d.nx) + "," + std::to_string(d.ny) + "," + std::to_string(d.nz) + ")";
}

void check_dims(const Dims& dims) {
  if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0) {
    throw Error(ErrorKind::InvalidArgument, "dims must be positive, got " + dims_string(dims));
  }
}

std::vector<char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Byte-order aware view over a raw header/data buffer.
class ByteReader {
 public:
  ByteReader(const std::vector<char>& bytes, bool swap) : bytes_(bytes), swap_(swap) {}

  template <typename T>
  T get(std::size_t offset) const {
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + offset, sizeof(T));
    if (swap_) std::reverse(std::begin(raw), std::end(raw));
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

 private:
  const std::vector<char>& bytes_;
  bool swap_;
};

template <typename T>
T swap_bytes(T value) {
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  std::reverse(std::begin(raw), std::end(raw));
  std::memcpy(&value, raw, sizeof(T));
  return value;
}

std::size_t datatype_size(std::int16_t code) {
  switch (code) {
    case 2: return 1;
    case 4: return 2;
    case 8: return 4;
    case 16: return 4;
    case 64: return 8;
    default: return 0;
  }
}

DataType datatype_from_code(std::int16_t code) {
  switch (code) {
    case 2: return DataType::uint8;
    case 4: return DataType::int16;
    case 8: return DataType::int32;
    case 16: return DataType::float32;
    default: return DataType::float64;
  }
}

}  // namespace

Volume::Volume(Dims dims, std::vector<double> data, VoxelSize voxel_size, DataType origin)
    : dims_(dims), voxel_size_(voxel_size), data_(std::move(data)), origin_(origin) {
  check_dims(dims_);
  if (data_.size() != dims_.size()) {
    throw Error(ErrorKind::DimMismatch,
                "data length " + std::to_string(data_.size()) + " does not match dims " +
                    dims_string(dims_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error(ErrorKind::NonFiniteVoxel, "non-finite value at linear index " + std::to_string(i));
    }
  }
}

Volume Volume::zeros(Dims dims, VoxelSize voxel_size) {
  return Volume(dims, std::vector<double>(dims.size(), 0.0), voxel_size);
}

Mask::Mask(Dims dims, std::vector<std::uint8_t> inside) : dims_(dims), inside_(std::move(inside)) {
  check_dims(dims_);
  if (inside_.size() != dims_.size()) {
    throw Error(ErrorKind::DimMismatch, "mask length does not match dims " + dims_string(dims_));
  }
  for (auto& f : inside_) {
    f = f ? 1 : 0;
    count_ += f;
  }
  if (count_ == 0) throw Error(ErrorKind::EmptyMask, "mask has no inside voxels");
}

Mask Mask::full(Dims dims) { return Mask(dims, std::vector<std::uint8_t>(dims.size(), 1)); }

SubjectStack::SubjectStack(std::vector<Volume> subjects, Mask mask)
    : subjects_(std::move(subjects)), mask_(std::move(mask)) {
  if (subjects_.size() < 2) {
    throw Error(ErrorKind::InvalidArgument,
                "one-sample test needs N >= 2 subjects, got N=" + std::to_string(subjects_.size()));
  }
  for (std::size_t i = 0; i < subjects_.size(); ++i) {
    if (subjects_[i].dims() != mask_.dims()) {
      throw Error(ErrorKind::DimMismatch, "subject " + std::to_string(i) + " dims " +
                                              dims_string(subjects_[i].dims()) +
                                              " differ from mask dims " + dims_string(mask_.dims()));
    }
  }
}

Volume load_nifti(const std::filesystem::path& path) {
  const std::vector<char> bytes = read_all(path);
  if (bytes.size() < static_cast<std::size_t>(kNiftiHeaderSize)) {
    throw Error(ErrorKind::MalformedHeader, path.string() + ": file shorter than 348-byte header");
  }

  std::int32_t sizeof_hdr;
  std::memcpy(&sizeof_hdr, bytes.data(), sizeof sizeof_hdr);
  bool swap = false;
  if (sizeof_hdr != kNiftiHeaderSize) {
    if (swap_bytes(sizeof_hdr) != kNiftiHeaderSize) {
      throw Error(ErrorKind::MalformedHeader,
                  path.string() + ": sizeof_hdr is not 348 in either byte order");
    }
    swap = true;
  }
  const ByteReader hdr(bytes, swap);

  const char* magic = bytes.data() + 344;
  if (std::memcmp(magic, "ni1\0", 4) == 0) {
    throw Error(ErrorKind::MalformedHeader,
                path.string() + ": header/image pairs (magic ni1) are not supported; use single-file .nii");
  }
  if (std::memcmp(magic, "n+1\0", 4) != 0) {
    throw Error(ErrorKind::MalformedHeader, path.string() + ": bad magic");
  }

  std::int16_t dim[8];
  for (int i = 0; i < 8; ++i) dim[i] = hdr.get<std::int16_t>(40 + 2 * i);
  if (dim[0] < 1 || dim[0] > 7) {
    throw Error(ErrorKind::MalformedHeader, path.string() + ": dim[0] out of range");
  }
  for (int i = 4; i < 8; ++i) {
    if (dim[i] > 1) {
      throw Error(ErrorKind::MalformedHeader,
                  path.string() + ": dim[" + std::to_string(i) + "]=" + std::to_string(dim[i]) +
                      "; only single 3D volumes are accepted");
    }
  }
  Dims dims;
  std::size_t* extents[3] = {&dims.nx, &dims.ny, &dims.nz};
  for (int i = 1; i <= 3; ++i) {
    const std::int16_t d = i <= dim[0] ? dim[i] : 1;
    if (d < 1) {
      throw Error(ErrorKind::MalformedHeader,
                  path.string() + ": dim[" + std::to_string(i) + "] must be positive");
    }
    *extents[i - 1] = static_cast<std::size_t>(d);
  }

  const std::int16_t datatype = hdr.get<std::int16_t>(70);
  const std::size_t elem = datatype_size(datatype);
  if (elem == 0) {
    throw Error(ErrorKind::UnsupportedDatatype,
                path.string() + ": datatype code " + std::to_string(datatype));
  }

  VoxelSize voxel_size;
  for (int i = 0; i < 3; ++i) voxel_size[i] = hdr.get<float>(76 + 4 * (i + 1));

  const float vox_offset = hdr.get<float>(108);
  if (!(vox_offset >= 0.0f) || (vox_offset > 0.0f && vox_offset < static_cast<float>(kNiftiHeaderSize))) {
    throw Error(ErrorKind::MalformedHeader, path.string() + ": vox_offset out of range");
  }
  // single-file NIfTI stores data after the header even when vox_offset is 0
  const std::size_t offset = std::max<std::size_t>(static_cast<std::size_t>(vox_offset), kNiftiHeaderSize);

  float slope = hdr.get<float>(112);
  float inter = hdr.get<float>(116);
  if (!std::isfinite(slope)) slope = 0.0f;
  if (!std::isfinite(inter)) inter = 0.0f;
  const bool scale = slope != 0.0f;

  const std::size_t count = dims.size();
  if (bytes.size() < offset || bytes.size() - offset < count * elem) {
    throw Error(ErrorKind::TruncatedData, path.string() + ": expected " + std::to_string(count * elem) +
                                              " data bytes after offset " + std::to_string(offset));
  }

  const ByteReader data(bytes, swap);
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = offset + i * elem;
    double v = 0.0;
    switch (datatype) {
      case 2: v = static_cast<unsigned char>(bytes[at]); break;
      case 4: v = data.get<std::int16_t>(at); break;
      case 8: v = data.get<std::int32_t>(at); break;
      case 16: v = data.get<float>(at); break;
      case 64: v = data.get<double>(at); break;
    }
    if (scale) v = v * static_cast<double>(slope) + static_cast<double>(inter);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NonFiniteVoxel,
                  path.string() + ": non-finite value at linear index " + std::to_string(i));
    }
    values[i] = v;
  }
  return Volume(dims, std::move(values), voxel_size, datatype_from_code(datatype));
}

void write_nifti(const Volume& volume, const std::filesystem::path& path) {
  const Dims& d = volume.dims();
  for (std::size_t e : {d.nx, d.ny, d.nz}) {
    if (e > 32767) throw Error(ErrorKind::InvalidArgument, "dimension exceeds NIfTI-1 int16 range");
  }

  std::vector<char> out(kNiftiVoxOffset + volume.size() * sizeof(float), 0);
  auto put = [&out](std::size_t offset, auto value) {
    std::memcpy(out.data() + offset, &value, sizeof value);
  };
  put(0, kNiftiHeaderSize);
  const std::int16_t dim[8] = {3,
                               static_cast<std::int16_t>(d.nx),
                               static_cast<std::int16_t>(d.ny),
                               static_cast<std::int16_t>(d.nz),
                               1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) put(40 + 2 * i, dim[i]);
  put(70, std::int16_t{16});
  put(72, std::int16_t{32});
  const float pixdim[8] = {1.0f,
                           static_cast<float>(volume.voxel_size()[0]),
                           static_cast<float>(volume.voxel_size()[1]),
                           static_cast<float>(volume.voxel_size()[2]),
                           0.0f, 0.0f, 0.0f, 0.0f};
  for (int i = 0; i < 8; ++i) put(76 + 4 * i, pixdim[i]);
  put(108, static_cast<float>(kNiftiVoxOffset));
  put(112, 1.0f);
  put(116, 0.0f);
  std::memcpy(out.data() + 344, "n+1\0", 4);

  const auto data = volume.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    put(kNiftiVoxOffset + i * sizeof(float), static_cast<float>(data[i]));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

namespace {

std::filesystem::path raw_stem(const std::filesystem::path& path) {
  const auto ext = path.extension();
  if (ext == ".f32raw" || ext == ".json") {
    auto stem = path;
    stem.replace_extension();
    return stem;
  }
  return path;
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

Volume load_raw(const std::filesystem::path& path) {
  const auto stem = raw_stem(path);
  const auto json_path = with_suffix(stem, ".json");
  const auto bin_path = with_suffix(stem, ".f32raw");

  std::ifstream js(json_path);
  if (!js) throw Error(ErrorKind::Io, "cannot open " + json_path.string());
  Dims dims;
  VoxelSize voxel_size{1.0, 1.0, 1.0};
  try {
    const auto meta = nlohmann::json::parse(js);
    const auto& jd = meta.at("dims");
    if (!jd.is_array() || jd.size() != 3) throw Error(ErrorKind::MalformedHeader, "dims must have 3 entries");
    for (const auto& e : jd) {
      if (!e.is_number_integer() || e.get<long long>() < 1) {
        throw Error(ErrorKind::MalformedHeader, json_path.string() + ": dims must be positive integers");
      }
    }
    dims = {jd[0].get<std::size_t>(), jd[1].get<std::size_t>(), jd[2].get<std::size_t>()};
    if (meta.contains("voxel_size")) {
      const auto& vs = meta["voxel_size"];
      if (!vs.is_array() || vs.size() != 3) {
        throw Error(ErrorKind::MalformedHeader, json_path.string() + ": voxel_size must have 3 entries");
      }
      for (int i = 0; i < 3; ++i) voxel_size[i] = vs[i].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedHeader, json_path.string() + ": " + e.what());
  }

  const std::vector<char> bytes = read_all(bin_path);
  const std::size_t count = dims.size();
  if (bytes.size() < count * sizeof(float)) {
    throw Error(ErrorKind::TruncatedData, bin_path.string() + ": expected " +
                                              std::to_string(count * sizeof(float)) + " bytes");
  }
  const ByteReader reader(bytes, std::endian::native == std::endian::big);
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = reader.get<float>(i * sizeof(float));
    if (!std::isfinite(values[i])) {
      throw Error(ErrorKind::NonFiniteVoxel,
                  bin_path.string() + ": non-finite value at linear index " + std::to_string(i));
    }
  }
  return Volume(dims, std::move(values), voxel_size, DataType::float32);
}

void write_raw(const Volume& volume, const std::filesystem::path& stem_in) {
  const auto stem = raw_stem(stem_in);
  nlohmann::json meta;
  meta["dims"] = {volume.dims().nx, volume.dims().ny, volume.dims().nz};
  meta["voxel_size"] = {volume.voxel_size()[0], volume.voxel_size()[1], volume.voxel_size()[2]};
  {
    std::ofstream js(with_suffix(stem, ".json"), std::ios::trunc);
    if (!js) throw Error(ErrorKind::Io, "cannot write " + with_suffix(stem, ".json").string());
    js << meta.dump(2) << '\n';
  }
  std::vector<char> out(volume.size() * sizeof(float));
  for (std::size_t i = 0; i < volume.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(volume[i]));
    if constexpr (std::endian::native == std::endian::big) bits = swap_bytes(bits);
    std::memcpy(out.data() + i * sizeof(float), &bits, sizeof bits);
  }
  std::ofstream bin(with_suffix(stem, ".f32raw"), std::ios::binary | std::ios::trunc);
  if (!bin) throw Error(ErrorKind::Io, "cannot write " + with_suffix(stem, ".f32raw").string());
  bin.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!bin) throw Error(ErrorKind::Io, "write failed for " + with_suffix(stem, ".f32raw").string());
}

Volume load_volume(const std::filesystem::path& path) {
  const auto ext = path.extension();
  if (ext == ".f32raw" || ext == ".json") return load_raw(path);
  return load_nifti(path);
}

Mask mask_from_volume(const Volume& volume, double threshold) {
  std::vector<std::uint8_t> inside(volume.size());
  for (std::size_t i = 0; i < volume.size(); ++i) inside[i] = volume[i] > threshold ? 1 : 0;
  return Mask(volume.dims(), std::move(inside));
}

Mask load_mask(const std::filesystem::path& path, double threshold) {
  if (path.extension() == ".csv") {
    throw Error(ErrorKind::InvalidArgument, "CSV mask lists need explicit dims; use load_mask_csv");
  }
  return mask_from_volume(load_volume(path), threshold);
}

Mask load_mask_csv(const std::filesystem::path& path, Dims dims) {
  check_dims(dims);
  const auto records = csv::read_file(path);
  if (records.empty()) throw Error(ErrorKind::Schema, path.string() + ": missing header");
  const csv::Header header(records.front());
  const std::size_t cx = header.require("x");
  const std::size_t cy = header.require("y");
  const std::size_t cz = header.require("z");
  std::vector<std::uint8_t> inside(dims.size(), 0);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const long long x = csv::parse_int(rec, cx, "x");
    const long long y = csv::parse_int(rec, cy, "y");
    const long long z = csv::parse_int(rec, cz, "z");
    if (x < 0 || y < 0 || z < 0 || static_cast<std::size_t>(x) >= dims.nx ||
        static_cast<std::size_t>(y) >= dims.ny || static_cast<std::size_t>(z) >= dims.nz) {
      throw Error(ErrorKind::Schema, "line " + std::to_string(rec.line) + ": coordinate outside grid " +
                                         dims_string(dims));
    }
    inside[dims.index(x, y, z)] = 1;
  }
  return Mask(dims, std::move(inside));
}

void write_mask_csv(const Mask& mask, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << "x,y,z\n";
  for (std::size_t i = 0; i < mask.dims().size(); ++i) {
    if (!mask.inside(i)) continue;
    const Coord c = mask.dims().coord(i);
    out << c.x << ',' << c.y << ',' << c.z << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace clusterfdr
