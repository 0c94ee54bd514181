#include "negev/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "negev/rng.hpp"

namespace negev {
namespace {

constexpr char kMagic[8] = {'N', 'G', 'V', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct Reader {
  std::string bytes;
  std::size_t pos = 0;

  bool eof() const { return pos >= bytes.size(); }
  void need(std::size_t n, const char* what) {
    if (pos + n > bytes.size())
      throw ParseError(std::string("checkpoint truncated while reading ") + what, pos);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  for (const ParamSet::Entry& e : params.entries()) {
    put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out.append(e.name);
    put_u32(out, static_cast<std::uint32_t>(e.tensor.rank()));
    for (int ext : e.tensor.shape()) put_u64(out, static_cast<std::uint64_t>(ext));
    for (double v : e.tensor.values()) put_f64(out, v);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write file: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

std::vector<std::pair<std::string, Tensor>> load_checkpoint(
    const std::filesystem::path& path) {
  Reader r{read_file(path)};
  r.need(sizeof(kMagic), "magic");
  if (std::memcmp(r.bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw ParseError("bad checkpoint magic", 0);
  r.pos = sizeof(kMagic);

  std::vector<std::pair<std::string, Tensor>> result;
  while (!r.eof()) {
    const std::uint32_t name_len = r.u32("name length");
    std::string name = r.str(name_len, "name");
    const std::uint32_t rank = r.u32("rank");
    std::vector<int> shape(rank);
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const std::uint64_t ext = r.u64("extent");
      if (ext == 0 || ext > (1ULL << 31))
        throw ParseError("invalid extent in checkpoint", r.pos - 8);
      shape[i] = static_cast<int>(ext);
      count *= ext;
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) values[i] = r.f64("values");
    result.emplace_back(std::move(name), Tensor::from_values(std::move(shape), std::move(values)));
  }
  return result;
}

void load_checkpoint_into(const std::filesystem::path& path, ParamSet& params) {
  auto loaded = load_checkpoint(path);
  if (loaded.size() != params.size())
    throw StateError("checkpoint tensor count (" + std::to_string(loaded.size()) +
                     ") does not match parameter set (" + std::to_string(params.size()) + ")");
  auto& entries = params.entries();
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    auto& [name, tensor] = loaded[i];
    if (name != entries[i].name)
      throw StateError("checkpoint name mismatch at slot " + std::to_string(i) + ": got '" +
                       name + "', expected '" + entries[i].name + "'");
    if (tensor.shape() != entries[i].tensor.shape())
      throw DimensionError("checkpoint shape mismatch for '" + name + "'");
    auto dst = entries[i].tensor.values_mut();
    auto src = tensor.values();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

std::uint64_t file_hash(const std::filesystem::path& path) {
  return fnv1a64(read_file(path));
}

}  // namespace negev
