#include "horen/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace horen {

namespace {

constexpr char kMagic[8] = {'H', 'O', 'R', 'E', 'N', 'C', 'B', 'K'};
constexpr std::uint32_t kVersion = 1;
// Caps protect the loader from absurd length fields in corrupt files.
constexpr std::uint32_t kMaxDim = 1u << 20;
constexpr std::uint32_t kMaxLabelLen = 1u << 20;

void put_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) {
    throw IoError("write failed");
  }
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) {
    b[i] = static_cast<unsigned char>(v >> (8 * i));
  }
  put_bytes(out, b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) {
    b[i] = static_cast<unsigned char>(v >> (8 * i));
  }
  put_bytes(out, b, 8);
}

void put_f64(std::ostream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void get_bytes(std::istream& in, void* data, std::size_t n) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw FormatError("truncated file");
  }
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  get_bytes(in, b, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  }
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  get_bytes(in, b, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  }
  return v;
}

double get_f64(std::istream& in) {
  return std::bit_cast<double>(get_u64(in));
}

}  // namespace

void save_codebook(const Codebook& book, std::ostream& out) {
  put_bytes(out, kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(book.dim()));
  put_u64(out, static_cast<std::uint64_t>(book.size()));
  for (Index i = 0; i < book.size(); ++i) {
    const CodebookEntry& e = book.entry(i);
    for (Index j = 0; j < book.dim(); ++j) {
      put_f64(out, e.key[j]);
    }
    for (Index j = 0; j < book.dim(); ++j) {
      put_f64(out, e.payload.value[j]);
    }
    const unsigned char trained = e.payload.trained ? 1 : 0;
    put_bytes(out, &trained, 1);
    put_f64(out, e.payload.final_loss);
    put_u32(out, static_cast<std::uint32_t>(e.payload.steps_used));
    put_u32(out, static_cast<std::uint32_t>(e.label.size()));
    put_bytes(out, e.label.data(), e.label.size());
    put_u64(out, e.created_at);
  }
  out.flush();
  if (!out) {
    throw IoError("flush failed");
  }
}

void save_codebook(const Codebook& book, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  save_codebook(book, out);
}

Codebook load_codebook(std::istream& in) {
  char magic[8];
  get_bytes(in, magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("bad magic");
  }
  const std::uint32_t version = get_u32(in);
  if (version != kVersion) {
    throw FormatError("unsupported version " + std::to_string(version));
  }
  const std::uint32_t dim = get_u32(in);
  if (dim == 0 || dim > kMaxDim) {
    throw FormatError("implausible dimension " + std::to_string(dim));
  }
  const std::uint64_t count = get_u64(in);

  Codebook book(static_cast<Index>(dim));
  VectorX key(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    for (std::uint32_t j = 0; j < dim; ++j) {
      key[j] = get_f64(in);
    }
    Payload p;
    p.value.resize(dim);
    for (std::uint32_t j = 0; j < dim; ++j) {
      p.value[j] = get_f64(in);
    }
    unsigned char trained = 0;
    get_bytes(in, &trained, 1);
    if (trained > 1) {
      throw FormatError("corrupt trained flag");
    }
    p.trained = trained == 1;
    p.final_loss = get_f64(in);
    p.steps_used = static_cast<int>(get_u32(in));
    const std::uint32_t label_len = get_u32(in);
    if (label_len > kMaxLabelLen) {
      throw FormatError("implausible label length " +
                        std::to_string(label_len));
    }
    EntryLabel label(label_len, '\0');
    get_bytes(in, label.data(), label_len);
    const std::uint64_t created_at = get_u64(in);

    const Scalar norm = key.norm();
    if (!(std::abs(norm - 1.0) <= kUnitNormTolerance)) {
      throw FormatError("entry " + std::to_string(i) + " key is not unit");
    }
    try {
      book.insert(UnitVector::from_unit(key), std::move(p), std::move(label),
                  created_at);
    } catch (const InvalidConfigError& e) {
      throw FormatError(std::string("entry ") + std::to_string(i) + ": " +
                        e.what());
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after last entry");
  }
  return book;
}

Codebook load_codebook(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading");
  }
  return load_codebook(in);
}

}  // namespace horen
