#include "grouprec/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace grouprec {
namespace {

constexpr char kMagic[8] = {'G', 'R', 'E', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::ostream& os, const void* p, std::size_t len) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
}

void get_bytes(std::istream& is, void* p, std::size_t len) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
  if (!is) throw UserError("checkpoint: truncated file");
}

template <typename T>
void put(std::ostream& os, T v) {
  put_bytes(os, &v, sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  get_bytes(is, &v, sizeof(T));
  return v;
}

void put_matrix(std::ostream& os, const MatX& m) {
  put<std::int64_t>(os, m.rows());
  put<std::int64_t>(os, m.cols());
  put_bytes(os, m.data(), sizeof(Real) * static_cast<std::size_t>(m.size()));
}

MatX get_matrix(std::istream& is) {
  const auto rows = get<std::int64_t>(is);
  const auto cols = get<std::int64_t>(is);
  if (rows < 0 || cols < 0) throw UserError("checkpoint: bad matrix header");
  MatX m(rows, cols);
  get_bytes(is, m.data(), sizeof(Real) * static_cast<std::size_t>(m.size()));
  return m;
}

void put_vector(std::ostream& os, const VecX& v) {
  put<std::int64_t>(os, v.size());
  put_bytes(os, v.data(), sizeof(Real) * static_cast<std::size_t>(v.size()));
}

VecX get_vector(std::istream& is) {
  const auto n = get<std::int64_t>(is);
  if (n < 0) throw UserError("checkpoint: bad vector header");
  VecX v(n);
  get_bytes(is, v.data(), sizeof(Real) * static_cast<std::size_t>(v.size()));
  return v;
}

void put_adam(std::ostream& os, const AdamState& s) {
  put<std::int64_t>(os, s.step);
  put<Real>(os, s.lr);
  put<Real>(os, s.beta1);
  put<Real>(os, s.beta2);
  put<Real>(os, s.eps);
  put_matrix(os, s.m);
  put_matrix(os, s.v);
}

AdamState get_adam(std::istream& is) {
  AdamState s;
  s.step = get<std::int64_t>(is);
  s.lr = get<Real>(is);
  s.beta1 = get<Real>(is);
  s.beta2 = get<Real>(is);
  s.eps = get<Real>(is);
  s.m = get_matrix(is);
  s.v = get_matrix(is);
  return s;
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint64_t>(os, s.size());
  put_bytes(os, s.data(), s.size());
}

std::string get_string(std::istream& is) {
  const auto len = get<std::uint64_t>(is);
  std::string s(len, '\0');
  get_bytes(is, s.data(), len);
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainedModel& model) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw UserError("cannot write checkpoint: " + path);
  put_bytes(os, kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kVersion);
  put<std::int64_t>(os, model.emb.users.rows());
  put<std::int64_t>(os, model.emb.items.rows());
  put<std::int64_t>(os, model.emb.dim);
  put<std::uint8_t>(os, model.has_groups ? 1 : 0);
  put<std::int64_t>(os, model.next_epoch);
  put_matrix(os, model.emb.users);
  put_matrix(os, model.emb.items);
  put_adam(os, model.opt_users);
  put_adam(os, model.opt_items);
  if (model.has_groups) {
    put_matrix(os, model.groups.centers);
    put_vector(os, model.groups.radius);
    put_vector(os, model.groups.density);
    put_adam(os, model.opt_centers);
  }
  put_string(os, model.rng.serialize());
  if (!os) throw UserError("checkpoint write failed: " + path);
}

TrainedModel load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UserError("cannot open checkpoint: " + path);
  char magic[8];
  get_bytes(is, magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw UserError("not a checkpoint file: " + path);
  }
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion) {
    throw UserError("unsupported checkpoint version " + std::to_string(version));
  }
  TrainedModel model;
  const auto n = get<std::int64_t>(is);
  const auto m = get<std::int64_t>(is);
  const auto d = get<std::int64_t>(is);
  model.has_groups = get<std::uint8_t>(is) != 0;
  model.next_epoch = static_cast<int>(get<std::int64_t>(is));
  model.emb.users = get_matrix(is);
  model.emb.items = get_matrix(is);
  model.emb.dim = d;
  if (model.emb.users.rows() != n || model.emb.items.rows() != m ||
      model.emb.users.cols() != d || model.emb.items.cols() != d) {
    throw UserError("checkpoint: inconsistent embedding shapes");
  }
  model.opt_users = get_adam(is);
  model.opt_items = get_adam(is);
  if (model.has_groups) {
    model.groups.centers = get_matrix(is);
    model.groups.radius = get_vector(is);
    model.groups.density = get_vector(is);
    model.groups.k_prime = model.groups.centers.rows();
    model.groups.total = model.groups.k_prime;
    model.groups.live.assign(static_cast<std::size_t>(model.groups.k_prime), 1);
    model.groups.processed.assign(static_cast<std::size_t>(model.groups.k_prime), 1);
    model.opt_centers = get_adam(is);
  }
  model.rng.deserialize(get_string(is));
  return model;
}

}  // namespace grouprec
