#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fplap/nonlocal.hpp"

namespace fplap {
namespace {

constexpr std::array<char, 8> kMagic{'F', 'P', 'L', 'A', 'P', 'K', 'W', '\0'};

template <class T>
void put_le(std::ostream& os, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  std::array<char, sizeof(T)> buf;
  for (std::size_t k = 0; k < sizeof(T); ++k) buf[k] = static_cast<char>((bits >> (8 * k)) & 0xFFu);
  os.write(buf.data(), buf.size());
}

template <class T>
T get_le(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  std::array<unsigned char, sizeof(T)> buf;
  if (!is.read(reinterpret_cast<char*>(buf.data()), buf.size()))
    throw Error(ErrorCode::CacheFormat, "truncated kernel cache");
  U bits = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) bits |= static_cast<U>(buf[k]) << (8 * k);
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

}  // namespace

void save_kernel_cache(const KernelWeights& K, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, kKernelCacheVersion);
  put_le<double>(os, K.mesh().a());
  put_le<double>(os, K.mesh().b());
  put_le<std::uint64_t>(os, K.size());
  put_le<double>(os, K.s());
  put_le<double>(os, K.p());
  for (double w : K.weights()) put_le<double>(os, w);
  for (double z : K.zeta()) put_le<double>(os, z);
  if (!os) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

KernelWeights load_kernel_cache(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic)
    throw Error(ErrorCode::CacheFormat, "bad magic in " + path.string());
  const auto version = get_le<std::uint32_t>(is);
  if (version != kKernelCacheVersion)
    throw Error(ErrorCode::CacheFormat, "unsupported cache version " + std::to_string(version));
  const double a = get_le<double>(is);
  const double b = get_le<double>(is);
  const auto n = get_le<std::uint64_t>(is);
  const double s = get_le<double>(is);
  const double p = get_le<double>(is);
  if (n < kMinNodes || n > (1u << 16)) throw Error(ErrorCode::CacheFormat, "implausible N in cache");
  const Mesh mesh = build_mesh(a, b, static_cast<std::size_t>(n));
  std::vector<double> w(n * n);
  for (double& v : w) v = get_le<double>(is);
  std::vector<double> zeta(n);
  for (double& v : zeta) v = get_le<double>(is);
  if (is.peek() != std::char_traits<char>::eof()) throw Error(ErrorCode::CacheFormat, "trailing bytes in cache");
  return KernelWeights(mesh, s, p, std::move(w), std::move(zeta));
}

KernelWeights load_kernel_cache(const std::filesystem::path& path, const Mesh& mesh, double s, double p) {
  KernelWeights K = load_kernel_cache(path);
  if (!(K.mesh() == mesh) || K.s() != s || K.p() != p)
    throw Error(ErrorCode::CacheFormat, "cache key mismatch in " + path.string());
  return K;
}

KernelWeights cached_kernel(const std::filesystem::path& dir, const Mesh& mesh, double s, double p) {
  std::ostringstream name;
  name << "kernel_" << std::hexfloat << mesh.a() << '_' << mesh.b() << '_' << mesh.size() << '_' << s << '_' << p
       << ".bin";
  const auto path = dir / name.str();
  if (std::filesystem::exists(path)) {
    try {
      return load_kernel_cache(path, mesh, s, p);
    } catch (const Error&) {
      // stale or corrupt entry: rebuild below
    }
  }
  KernelWeights K = build_kernel(mesh, s, p);
  std::filesystem::create_directories(dir);
  save_kernel_cache(K, path);
  return K;
}

}  // namespace fplap
