#include "falq/tensorio.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "falq/error.hpp"

namespace falq {

namespace {

constexpr char kTensorMagic[4] = {'F', 'A', 'T', 'F'};
constexpr char kContainerMagic[4] = {'F', 'A', 'L', 'Q'};
constexpr std::uint16_t kTensorVersion = 1;

class ByteWriter {
 public:
  explicit ByteWriter(Bytes& out) : out_(out) {}

  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void zeros(std::size_t n) { out_.insert(out_.end(), n, 0); }

 private:
  Bytes& out_;
};

class ByteReader {
 public:
  ByteReader(ByteView bytes, const char* what) : bytes_(bytes), what_(what) {}

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string(what_) + ": truncated at byte " + std::to_string(pos_) +
                        " (need " + std::to_string(n) + " more)");
    }
  }
  ByteView take(std::size_t n) {
    need(n);
    auto view = bytes_.subspan(pos_, n);
    pos_ += n;
    return view;
  }
  template <typename U>
  U uint() {
    auto b = take(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  ByteView bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

template <typename Err = ParamError>
std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw Err(std::string(what) + ": dimension overflow");
  }
  return a * b;
}

void write_header(ByteWriter& w, DType dtype, std::span<const std::uint64_t> dims) {
  w.raw(kTensorMagic, 4);
  w.uint<std::uint16_t>(kTensorVersion);
  w.uint<std::uint8_t>(static_cast<std::uint8_t>(dtype));
  w.uint<std::uint8_t>(static_cast<std::uint8_t>(dims.size()));
  std::uint64_t count = 1;
  for (auto d : dims) {
    if (d == 0) throw ParamError("tensor dimensions must be nonzero");
    count = checked_mul(count, d, "tensor");
    w.uint<std::uint64_t>(d);
  }
  checked_mul(count, dtype_size(dtype), "tensor");
}

void write_scalar(ByteWriter& w, double v, DType dtype) {
  if (dtype == DType::float32) {
    w.f32(static_cast<float>(v));
  } else {
    w.f64(v);
  }
}

}  // namespace

std::size_t dtype_size(DType dtype) {
  switch (dtype) {
    case DType::float64: return 8;
    case DType::float32: return 4;
    case DType::complex64: return 8;
    case DType::complex128: return 16;
  }
  throw FormatError("unsupported dtype code " + std::to_string(static_cast<int>(dtype)));
}

bool is_complex(DType dtype) { return dtype == DType::complex64 || dtype == DType::complex128; }

const RealMatrix& Tensor::real() const {
  if (!holds_real()) throw FormatError("tensor holds complex values, expected real");
  return std::get<RealMatrix>(values);
}

const ComplexMatrix& Tensor::complex() const {
  if (holds_real()) throw FormatError("tensor holds real values, expected complex");
  return std::get<ComplexMatrix>(values);
}

Bytes encode_tensor(const RealMatrix& m, DType dtype) {
  if (is_complex(dtype)) throw ParamError("real matrix cannot be written with a complex dtype");
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.rows()),
                                 static_cast<std::uint64_t>(m.cols())};
  Bytes out;
  ByteWriter w(out);
  write_header(w, dtype, dims);
  out.reserve(out.size() + static_cast<std::size_t>(m.size()) * dtype_size(dtype));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) write_scalar(w, m(i, j), dtype);
  }
  return out;
}

Bytes encode_tensor(const ComplexMatrix& m, DType dtype) {
  if (!is_complex(dtype)) throw ParamError("complex matrix needs a complex dtype");
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.rows()),
                                 static_cast<std::uint64_t>(m.cols())};
  const DType part = dtype == DType::complex64 ? DType::float32 : DType::float64;
  Bytes out;
  ByteWriter w(out);
  write_header(w, dtype, dims);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      write_scalar(w, m(i, j).real(), part);
      write_scalar(w, m(i, j).imag(), part);
    }
  }
  return out;
}

Bytes encode_vector(const RealVector& v, DType dtype) {
  if (is_complex(dtype)) throw ParamError("real vector cannot be written with a complex dtype");
  const std::uint64_t dims[1] = {static_cast<std::uint64_t>(v.size())};
  Bytes out;
  ByteWriter w(out);
  write_header(w, dtype, dims);
  for (Index i = 0; i < v.size(); ++i) write_scalar(w, v(i), dtype);
  return out;
}

Tensor decode_tensor(ByteView bytes) {
  ByteReader r(bytes, "FATF");
  auto magic = r.take(4);
  if (std::memcmp(magic.data(), kTensorMagic, 4) != 0) throw FormatError("FATF: bad magic");
  const auto version = r.uint<std::uint16_t>();
  if (version != kTensorVersion) {
    throw FormatError("FATF: unsupported version " + std::to_string(version));
  }
  const auto code = r.uint<std::uint8_t>();
  if (code > 3) throw FormatError("FATF: unsupported dtype code " + std::to_string(code));
  Tensor t;
  t.dtype = static_cast<DType>(code);
  const auto ndim = r.uint<std::uint8_t>();
  if (ndim != 1 && ndim != 2) throw FormatError("FATF: ndim must be 1 or 2");
  std::uint64_t count = 1;
  for (int k = 0; k < ndim; ++k) {
    const auto d = r.uint<std::uint64_t>();
    if (d == 0) throw FormatError("FATF: zero dimension");
    t.dims.push_back(d);
    count = checked_mul<FormatError>(count, d, "FATF");
  }
  const std::uint64_t payload = checked_mul<FormatError>(count, dtype_size(t.dtype), "FATF");
  if (r.remaining() < payload) throw FormatError("FATF: truncated payload");
  if (r.remaining() > payload) throw FormatError("FATF: trailing bytes after payload");

  const Index rows = ndim == 2 ? static_cast<Index>(t.dims[0]) : 1;
  const Index cols = static_cast<Index>(ndim == 2 ? t.dims[1] : t.dims[0]);
  const bool single = t.dtype == DType::float32 || t.dtype == DType::complex64;
  auto next = [&]() -> double { return single ? static_cast<double>(r.f32()) : r.f64(); };

  if (is_complex(t.dtype)) {
    ComplexMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        const double re = next();
        const double im = next();
        m(i, j) = Complex(re, im);
      }
    }
    t.values = std::move(m);
  } else {
    RealMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) m(i, j) = next();
    }
    t.values = std::move(m);
  }
  return t;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, ByteView bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_tensor(const std::filesystem::path& path, const RealMatrix& m, DType dtype) {
  write_file(path, encode_tensor(m, dtype));
}

void write_tensor(const std::filesystem::path& path, const ComplexMatrix& m, DType dtype) {
  write_file(path, encode_tensor(m, dtype));
}

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

RealMatrix read_real_matrix(const std::filesystem::path& path) {
  Tensor t = read_tensor(path);
  if (t.dims.size() != 2) throw FormatError(path.string() + ": expected a 2D tensor");
  if (!t.holds_real()) throw FormatError(path.string() + ": expected a real tensor");
  return std::get<RealMatrix>(std::move(t.values));
}

std::size_t packed_size(std::size_t count, int bitwidth) {
  return (count * static_cast<std::size_t>(bitwidth) + 7) / 8;
}

Bytes pack_bits(std::span<const std::uint32_t> indices, int bitwidth) {
  if (bitwidth < 1 || bitwidth > 16) throw ParamError("bitwidth must be in 1..16");
  const std::uint32_t limit = 1u << bitwidth;
  Bytes out(packed_size(indices.size(), bitwidth), 0);
  std::size_t bit = 0;
  for (std::uint32_t v : indices) {
    if (v >= limit) {
      throw ParamError("index " + std::to_string(v) + " does not fit in " +
                       std::to_string(bitwidth) + " bits");
    }
    for (int k = 0; k < bitwidth; ++k, ++bit) {
      if ((v >> k) & 1u) out[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
    }
  }
  return out;
}

std::vector<std::uint32_t> unpack_bits(ByteView bytes, int bitwidth, std::size_t count) {
  if (bitwidth < 1 || bitwidth > 16) throw ParamError("bitwidth must be in 1..16");
  if (bytes.size() < packed_size(count, bitwidth)) throw FormatError("bit stream too short");
  std::vector<std::uint32_t> out(count, 0);
  std::size_t bit = 0;
  for (auto& v : out) {
    for (int k = 0; k < bitwidth; ++k, ++bit) {
      v |= static_cast<std::uint32_t>((bytes[bit / 8] >> (bit % 8)) & 1u) << k;
    }
  }
  return out;
}

Bytes serialize_container(const CompressedContainer& c) {
  const std::uint64_t cells = checked_mul(c.rows, c.half_cols, "FALQ");
  if (c.left.size() != checked_mul(c.rows, c.rank, "FALQ") ||
      c.right.size() != checked_mul(c.rank, c.half_cols, "FALQ")) {
    throw ParamError("FALQ: factor sizes disagree with header dims");
  }
  if (c.amp_stream.size() != packed_size(cells, c.amp_bits) ||
      c.phase_stream.size() != packed_size(cells, c.phase_bits)) {
    throw ParamError("FALQ: index stream sizes disagree with header dims");
  }
  std::uint16_t flags = c.flags & static_cast<std::uint16_t>(~container_flags::has_metadata);
  if (c.metadata) flags |= container_flags::has_metadata;

  Bytes out;
  ByteWriter w(out);
  w.raw(kContainerMagic, 4);
  w.uint<std::uint16_t>(c.version);
  w.uint<std::uint16_t>(flags);
  w.uint<std::uint64_t>(c.rows);
  w.uint<std::uint64_t>(c.cols);
  w.uint<std::uint64_t>(c.original_cols);
  w.uint<std::uint64_t>(c.half_cols);
  w.uint<std::uint64_t>(c.rank);
  w.uint<std::uint8_t>(c.amp_bits);
  w.uint<std::uint8_t>(c.phase_bits);
  w.zeros(6);
  w.f64(c.r_max);
  for (const auto& z : c.left) {
    w.f32(z.real());
    w.f32(z.imag());
  }
  for (const auto& z : c.right) {
    w.f32(z.real());
    w.f32(z.imag());
  }
  w.raw(c.amp_stream.data(), c.amp_stream.size());
  w.raw(c.phase_stream.data(), c.phase_stream.size());
  if (c.metadata) {
    w.uint<std::uint64_t>(c.metadata->size());
    w.raw(c.metadata->data(), c.metadata->size());
  }
  return out;
}

CompressedContainer parse_container(ByteView bytes) {
  ByteReader r(bytes, "FALQ");
  auto magic = r.take(4);
  if (std::memcmp(magic.data(), kContainerMagic, 4) != 0) throw FormatError("FALQ: bad magic");
  CompressedContainer c;
  c.version = r.uint<std::uint16_t>();
  if (c.version != CompressedContainer::kVersion) {
    throw FormatError("FALQ: unsupported version " + std::to_string(c.version));
  }
  c.flags = r.uint<std::uint16_t>();
  c.rows = r.uint<std::uint64_t>();
  c.cols = r.uint<std::uint64_t>();
  c.original_cols = r.uint<std::uint64_t>();
  c.half_cols = r.uint<std::uint64_t>();
  c.rank = r.uint<std::uint64_t>();
  c.amp_bits = r.uint<std::uint8_t>();
  c.phase_bits = r.uint<std::uint8_t>();
  r.take(6);
  c.r_max = r.f64();

  if (c.rows == 0 || c.cols == 0 || c.cols % 2 != 0 || c.half_cols != c.cols / 2 + 1) {
    throw FormatError("FALQ: inconsistent shape fields");
  }
  if (c.original_cols != c.cols && c.original_cols + 1 != c.cols) {
    throw FormatError("FALQ: original width inconsistent with transform width");
  }
  if (c.amp_bits < 1 || c.amp_bits > 16 || c.phase_bits < 1 || c.phase_bits > 16) {
    throw FormatError("FALQ: bit-widths out of range");
  }
  const std::uint64_t cells = checked_mul<FormatError>(c.rows, c.half_cols, "FALQ");
  const std::uint64_t n_left = checked_mul<FormatError>(c.rows, c.rank, "FALQ");
  const std::uint64_t n_right = checked_mul<FormatError>(c.rank, c.half_cols, "FALQ");
  r.need(checked_mul<FormatError>(n_left + n_right, 8, "FALQ"));

  auto read_factor = [&](std::uint64_t n) {
    std::vector<std::complex<float>> v(n);
    for (auto& z : v) {
      const float re = r.f32();
      const float im = r.f32();
      z = {re, im};
    }
    return v;
  };
  c.left = read_factor(n_left);
  c.right = read_factor(n_right);

  auto amp = r.take(packed_size(cells, c.amp_bits));
  c.amp_stream.assign(amp.begin(), amp.end());
  auto phase = r.take(packed_size(cells, c.phase_bits));
  c.phase_stream.assign(phase.begin(), phase.end());

  if (c.flags & container_flags::has_metadata) {
    const auto n = r.uint<std::uint64_t>();
    auto text = r.take(n);
    c.metadata = std::string(text.begin(), text.end());
  }
  // metadata presence is carried by the optional, not the flag word
  c.flags &= static_cast<std::uint16_t>(~container_flags::has_metadata);
  if (r.remaining() != 0) throw FormatError("FALQ: trailing bytes after payload");
  return c;
}

void write_container(const std::filesystem::path& path, const CompressedContainer& c) {
  write_file(path, serialize_container(c));
}

CompressedContainer read_container(const std::filesystem::path& path) {
  return parse_container(read_file(path));
}

}  // namespace falq
