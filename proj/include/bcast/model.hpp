#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcast/errors.hpp"
#include "bcast/scalar.hpp"

namespace bcast {

using json = nlohmann::json;

inline std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Alphabet sizes; symbols of an alphabet of size n are 0..n-1.
struct Alphabets {
  int u = 1, v = 1, x = 1, y = 1, z = 1, uhat = 1, vhat = 1;

  /// Source pairs (u, v) are flattened row-major: s = u * |V| + v.
  int pairs() const { return u * v; }
  int pair(int uu, int vv) const { return uu * v + vv; }
  int u_of(int s) const { return s / v; }
  int v_of(int s) const { return s % v; }
  /// Channel output pairs (y, z) flattened the same way.
  int outputs() const { return y * z; }

  bool operator==(const Alphabets&) const = default;
};

/// Row-major dense matrix.
template <class S>
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<S> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, S(0)) {}

  S& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  const S& operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::span<const S> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
  std::span<S> row(int r) {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
};

template <class S>
struct MarkovSource {
  std::vector<S> initial;  // over flattened (u, v)
  Matrix<S> transition;    // (u', v') -> distribution over (u, v)
};

/// Physically degraded broadcast channel X -> Y -> Z.
template <class S>
struct DegradedChannel {
  Matrix<S> inner;  // Q_{Y|X}, one row per x
  Matrix<S> outer;  // Q_{Z|Y}, one row per y

  /// Q_{YZ|X}(y, z | x) = Q_{Y|X}(y|x) Q_{Z|Y}(z|y).
  S joint(int x, int y, int z) const { return inner(x, y) * outer(y, z); }
};

template <class S>
struct DistortionSchedule {
  std::vector<Matrix<S>> rho1;  // per stage, |U| x |Uhat|
  std::vector<Matrix<S>> rho2;  // per stage, |V| x |Vhat|
  S rho_max = 1;
};

template <class S>
struct SystemModel {
  Alphabets sizes;
  int horizon = 1;
  MarkovSource<S> source;
  DegradedChannel<S> channel;
  DistortionSchedule<S> distortion;

  /// Law of the source pair at stage t (1-based) given the pair at t-1; for
  /// t == 1 the previous pair is ignored and the initial law is returned.
  std::span<const S> source_row(int t, int prev_pair) const {
    return t == 1 ? std::span<const S>(source.initial) : source.transition.row(prev_pair);
  }
};

// ---------------------------------------------------------------------------
// Validation

namespace detail {

template <class S>
std::string str(const S& x) {
  return scalar_traits<S>::to_string(x);
}

template <class S>
bool is_one(const S& total) {
  if constexpr (scalar_traits<S>::exact)
    return total == 1;
  else
    return std::fabs(total - 1.0) <= 1e-12;
}

template <class S>
void check_distribution(std::span<const S> row, const std::string& path, const std::string& where,
                        auto&& label) {
  for (std::size_t i = 0; i < row.size(); ++i)
    if (row[i] < 0)
      throw ModelError(path, "negative entry at " + where + ", entry " + label(static_cast<int>(i)));
  S total = sum(row);
  if (!is_one(total))
    throw ModelError(path, "row not stochastic at " + where + " (sum " + str(total) + ")");
}

inline std::string pair_label(const Alphabets& a, int s) {
  return "(u,v)=(" + std::to_string(a.u_of(s)) + "," + std::to_string(a.v_of(s)) + ")";
}

}  // namespace detail

/// Checks every invariant of an assembled model. Throws ModelError with the
/// offending index path.
template <class S>
void check_model(const SystemModel<S>& m) {
  const auto& a = m.sizes;
  const std::pair<const char*, int> named[] = {{"U", a.u}, {"V", a.v},       {"X", a.x},
                                                {"Y", a.y}, {"Z", a.z},       {"Uhat", a.uhat},
                                                {"Vhat", a.vhat}};
  for (auto [name, n] : named)
    if (n < 1) throw ModelError(std::string("alphabets.") + name, "size must be >= 1");
  if (m.horizon < 1) throw ModelError("horizon", "must be >= 1");

  auto dims = [](const std::string& path, const Matrix<S>& mat, int r, int c) {
    if (mat.rows != r || mat.cols != c || mat.data.size() != static_cast<std::size_t>(r) * c)
      throw ModelError(path, "dimension mismatch: expected " + std::to_string(r) + "x" +
                                 std::to_string(c) + ", got " + std::to_string(mat.rows) + "x" +
                                 std::to_string(mat.cols));
  };
  const int np = a.pairs();
  if (m.source.initial.size() != static_cast<std::size_t>(np))
    throw ModelError("source.initial", "dimension mismatch: expected " + std::to_string(np) +
                                           " entries, got " +
                                           std::to_string(m.source.initial.size()));
  auto pl = [&](int s) { return detail::pair_label(a, s); };
  detail::check_distribution<S>(m.source.initial, "source.initial", "initial law", pl);
  dims("source.transition", m.source.transition, np, np);
  for (int s = 0; s < np; ++s)
    detail::check_distribution<S>(m.source.transition.row(s),
                                  "source.transition[" + std::to_string(s) + "]", pl(s), pl);

  dims("channel.inner", m.channel.inner, a.x, a.y);
  for (int x = 0; x < a.x; ++x)
    detail::check_distribution<S>(m.channel.inner.row(x), "channel.inner[" + std::to_string(x) + "]",
                                  "x=" + std::to_string(x),
                                  [](int y) { return "y=" + std::to_string(y); });
  dims("channel.outer", m.channel.outer, a.y, a.z);
  for (int y = 0; y < a.y; ++y)
    detail::check_distribution<S>(m.channel.outer.row(y), "channel.outer[" + std::to_string(y) + "]",
                                  "y=" + std::to_string(y),
                                  [](int z) { return "z=" + std::to_string(z); });

  const auto& d = m.distortion;
  if (d.rho_max < 0) throw ModelError("distortion.rho_max", "must be >= 0");
  auto check_rho = [&](const std::vector<Matrix<S>>& rho, const std::string& name, int n, int nhat,
                       const char* sym) {
    if (rho.size() != static_cast<std::size_t>(m.horizon))
      throw ModelError("distortion." + name, "dimension mismatch: expected " +
                                                 std::to_string(m.horizon) + " stages, got " +
                                                 std::to_string(rho.size()));
    for (int t = 0; t < m.horizon; ++t) {
      const std::string path = "distortion." + name + "[t=" + std::to_string(t + 1) + "]";
      dims(path, rho[t], n, nhat);
      for (int w = 0; w < n; ++w)
        for (int wh = 0; wh < nhat; ++wh) {
          const S& r = rho[t](w, wh);
          if (r < 0 || r > d.rho_max)
            throw ModelError(path, std::string("distortion out of range at ") + sym + "=" +
                                       std::to_string(w) + "," + sym + "hat=" +
                                       std::to_string(wh) + " (value " + detail::str(r) +
                                       ", rho_max " + detail::str(d.rho_max) + ")");
        }
    }
  };
  check_rho(d.rho1, "rho1", a.u, a.uhat, "u");
  check_rho(d.rho2, "rho2", a.v, a.vhat, "v");
}

// ---------------------------------------------------------------------------
// Configuration files

namespace detail {

inline const json& field(const json& obj, const std::string& name, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(name);
  if (it == obj.end())
    throw SchemaError(path.empty() ? name : path + "." + name, "missing field '" + name + "'");
  return *it;
}

inline std::string join(const std::string& path, const std::string& name) {
  return path.empty() ? name : path + "." + name;
}

inline Rational number(const json& j, const std::string& path) {
  try {
    if (j.is_number_integer()) return Rational(static_cast<long>(j.get<std::int64_t>()));
    if (j.is_number_unsigned()) return Rational(static_cast<unsigned long>(j.get<std::uint64_t>()));
    if (j.is_number_float()) return rational_from_double(j.get<double>());
    if (j.is_string()) return parse_rational(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, e.what());
  }
  throw SchemaError(path, "expected a number or a rational string");
}

inline std::vector<Rational> vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline Matrix<Rational> matrix(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of rows");
  Matrix<Rational> m;
  m.rows = static_cast<int>(j.size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    auto row = vector(j[r], path + "[" + std::to_string(r) + "]");
    if (r == 0) m.cols = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != m.cols)
      throw ModelError(path + "[" + std::to_string(r) + "]", "dimension mismatch: ragged row");
    for (auto& x : row) m.data.push_back(std::move(x));
  }
  return m;
}

inline int size_field(const json& obj, const std::string& name, const std::string& path) {
  const json& j = field(obj, name, path);
  if (!j.is_number_integer()) throw SchemaError(join(path, name), "expected an integer");
  return j.get<int>();
}

template <class S>
json number_json(const S& x) {
  if constexpr (scalar_traits<S>::exact)
    return x.get_str();
  else
    return x;
}

template <class S>
json matrix_json(const Matrix<S>& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (const auto& x : m.row(r)) row.push_back(number_json(x));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Builds a model from a parsed configuration and checks every invariant.
/// All numbers are read exactly: rational strings ("1/3"), decimal strings and
/// JSON numbers (taken at their shortest round-trip decimal value).
inline SystemModel<Rational> validate_model(const json& raw) {
  using namespace detail;
  SystemModel<Rational> m;
  const json& al = field(raw, "alphabets", "");
  m.sizes.u = size_field(al, "U", "alphabets");
  m.sizes.v = size_field(al, "V", "alphabets");
  m.sizes.x = size_field(al, "X", "alphabets");
  m.sizes.y = size_field(al, "Y", "alphabets");
  m.sizes.z = size_field(al, "Z", "alphabets");
  m.sizes.uhat = al.contains("Uhat") ? size_field(al, "Uhat", "alphabets") : m.sizes.u;
  m.sizes.vhat = al.contains("Vhat") ? size_field(al, "Vhat", "alphabets") : m.sizes.v;
  m.horizon = size_field(raw, "horizon", "");

  const json& src = field(raw, "source", "");
  m.source.initial = vector(field(src, "initial", "source"), "source.initial");
  m.source.transition = matrix(field(src, "transition", "source"), "source.transition");

  const json& ch = field(raw, "channel", "");
  m.channel.inner = matrix(field(ch, "inner", "channel"), "channel.inner");
  m.channel.outer = matrix(field(ch, "outer", "channel"), "channel.outer");

  const json& d = field(raw, "distortion", "");
  m.distortion.rho_max = number(field(d, "rho_max", "distortion"), "distortion.rho_max");
  const std::pair<const char*, std::vector<Matrix<Rational>>*> schedules[] = {
      {"rho1", &m.distortion.rho1}, {"rho2", &m.distortion.rho2}};
  for (auto [name, target] : schedules) {
    const json& stages = field(d, name, "distortion");
    const std::string path = std::string("distortion.") + name;
    if (!stages.is_array()) throw SchemaError(path, "expected one matrix per stage");
    for (std::size_t t = 0; t < stages.size(); ++t)
      target->push_back(matrix(stages[t], path + "[t=" + std::to_string(t + 1) + "]"));
  }
  check_model(m);
  return m;
}

inline SystemModel<Rational> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("", "cannot open model file '" + path + "'");
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed model file: ") + e.what());
  }
  return validate_model(raw);
}

template <class S>
json to_json(const SystemModel<S>& m) {
  using detail::matrix_json;
  using detail::number_json;
  json j;
  j["alphabets"] = {{"U", m.sizes.u},       {"V", m.sizes.v},       {"X", m.sizes.x},
                    {"Y", m.sizes.y},       {"Z", m.sizes.z},       {"Uhat", m.sizes.uhat},
                    {"Vhat", m.sizes.vhat}};
  j["horizon"] = m.horizon;
  json init = json::array();
  for (const auto& p : m.source.initial) init.push_back(number_json(p));
  j["source"] = {{"initial", init}, {"transition", matrix_json(m.source.transition)}};
  j["channel"] = {{"inner", matrix_json(m.channel.inner)}, {"outer", matrix_json(m.channel.outer)}};
  json r1 = json::array(), r2 = json::array();
  for (const auto& r : m.distortion.rho1) r1.push_back(matrix_json(r));
  for (const auto& r : m.distortion.rho2) r2.push_back(matrix_json(r));
  j["distortion"] = {{"rho_max", number_json(m.distortion.rho_max)}, {"rho1", r1}, {"rho2", r2}};
  return j;
}

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex_hash(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

/// Content hash of the canonical serialization.
template <class S>
std::string model_hash(const SystemModel<S>& m) {
  return hex_hash(to_json(m).dump());
}

template <class T, class S>
Matrix<T> convert(const Matrix<S>& m) {
  Matrix<T> out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    if constexpr (std::is_same_v<S, Rational>)
      out.data[i] = scalar_traits<T>::from_rational(m.data[i]);
    else
      out.data[i] = static_cast<T>(m.data[i]);
  }
  return out;
}

/// Re-expresses an exact model in another scalar type.
template <class T>
SystemModel<T> convert(const SystemModel<Rational>& m) {
  SystemModel<T> out;
  out.sizes = m.sizes;
  out.horizon = m.horizon;
  for (const auto& p : m.source.initial) out.source.initial.push_back(scalar_traits<T>::from_rational(p));
  out.source.transition = convert<T>(m.source.transition);
  out.channel.inner = convert<T>(m.channel.inner);
  out.channel.outer = convert<T>(m.channel.outer);
  for (const auto& r : m.distortion.rho1) out.distortion.rho1.push_back(convert<T>(r));
  for (const auto& r : m.distortion.rho2) out.distortion.rho2.push_back(convert<T>(r));
  out.distortion.rho_max = scalar_traits<T>::from_rational(m.distortion.rho_max);
  return out;
}

// ---------------------------------------------------------------------------
// Canned instances

/// Identity kernel on an alphabet of size n.
inline Matrix<Rational> noiseless_kernel(int n) {
  Matrix<Rational> m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

/// Symmetric kernel: the input symbol survives with probability 1 - eps and
/// is replaced by each other symbol with probability eps / (n - 1).
inline Matrix<Rational> symmetric_kernel(int n, const Rational& eps) {
  if (n == 1) return noiseless_kernel(1);
  Matrix<Rational> m(n, n);
  Rational off = eps / (n - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = i == j ? Rational(1 - eps) : off;
  return m;
}

/// Hamming distortion: 0 when the reconstruction equals the symbol, 1 otherwise.
inline Matrix<Rational> hamming(int n, int nhat) {
  Matrix<Rational> m(n, nhat);
  for (int w = 0; w < n; ++w)
    for (int wh = 0; wh < nhat; ++wh) m(w, wh) = w == wh ? 0 : 1;
  return m;
}

/// Static uniform source with only a terminal Hamming distortion, so that the
/// expected total distortion is Pr(U != Uhat_T) + Pr(V != Vhat_T).
inline SystemModel<Rational> build_special_case(const Alphabets& sizes, int horizon,
                                                DegradedChannel<Rational> channel) {
  SystemModel<Rational> m;
  m.sizes = sizes;
  m.horizon = horizon;
  const int np = sizes.pairs();
  m.source.initial.assign(np, Rational(1, np));
  m.source.transition = noiseless_kernel(np);
  m.channel = std::move(channel);
  m.distortion.rho_max = 1;
  for (int t = 1; t <= horizon; ++t) {
    const bool terminal = t == horizon;
    m.distortion.rho1.push_back(terminal ? hamming(sizes.u, sizes.uhat)
                                         : Matrix<Rational>(sizes.u, sizes.uhat));
    m.distortion.rho2.push_back(terminal ? hamming(sizes.v, sizes.vhat)
                                         : Matrix<Rational>(sizes.v, sizes.vhat));
  }
  check_model(m);
  return m;
}

/// Special case with noiseless channels: requires |X| = |Y| = |Z|.
inline SystemModel<Rational> build_special_case(const Alphabets& sizes, int horizon) {
  if (sizes.x != sizes.y || sizes.y != sizes.z)
    throw ModelError("alphabets", "noiseless channels need |X| = |Y| = |Z|");
  return build_special_case(sizes, horizon,
                            DegradedChannel<Rational>{noiseless_kernel(sizes.x), noiseless_kernel(sizes.y)});
}

// ---------------------------------------------------------------------------
// Functional form Y = q1(X, N1), Z = q2(Y, N2)

/// Finite noise realization of a kernel under inverse-CDF coupling: the unit
/// interval is cut at every cumulative sum of every row; each cell is one
/// noise value, and `output(r, cell)` is the symbol row r emits on it.
template <class S>
struct NoiseCells {
  std::vector<S> width;
  Matrix<int> output_table;

  int count() const { return static_cast<int>(width.size()); }
  int output(int row, int cell) const { return output_table(row, cell); }
};

inline NoiseCells<Rational> noise_cells(const Matrix<Rational>& kernel) {
  std::vector<Rational> cuts{Rational(0), Rational(1)};
  for (int r = 0; r < kernel.rows; ++r) {
    Rational acc = 0;
    for (int c = 0; c < kernel.cols; ++c) {
      acc += kernel(r, c);
      cuts.push_back(acc);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  NoiseCells<Rational> cells;
  std::vector<Rational> left;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i] < 1 && cuts[i + 1] > cuts[i]) {
      cells.width.push_back(cuts[i + 1] - cuts[i]);
      left.push_back(cuts[i]);
    }
  cells.output_table = Matrix<int>(kernel.rows, cells.count());
  for (int r = 0; r < kernel.rows; ++r)
    for (int k = 0; k < cells.count(); ++k) {
      Rational acc = 0;
      int out = kernel.cols - 1;
      for (int c = 0; c < kernel.cols; ++c) {
        acc += kernel(r, c);
        if (acc > left[k]) {
          out = c;
          break;
        }
      }
      cells.output_table(r, k) = out;
    }
  return cells;
}

/// Inverse-CDF draw from a row: the first symbol whose cumulative mass
/// exceeds `uniform` (fixed symbol order).
template <class S>
int inverse_cdf(std::span<const S> row, double uniform) {
  double acc = 0;
  int last_positive = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const double p = to_double(row[i]);
    if (p > 0) last_positive = static_cast<int>(i);
    acc += p;
    if (uniform < acc && p > 0) return static_cast<int>(i);
  }
  return last_positive;
}

}  // namespace bcast
