#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qss/bits.hpp"
#include "qss/errors.hpp"

namespace qss::gf2 {

// Dense GF(2) matrix stored as rows of bits.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows, Bits(cols, 0)) {}
  explicit Matrix(std::vector<Bits> rows) : rows_(std::move(rows)) {
    cols_ = rows_.empty() ? 0 : rows_.front().size();
    for (const auto& r : rows_)
      if (r.size() != cols_) throw DomainError("matrix rows have different lengths");
  }

  std::size_t rows() const noexcept { return rows_.size(); }
  std::size_t cols() const noexcept { return cols_; }
  const Bits& row(std::size_t i) const { return rows_.at(i); }
  Bits& row(std::size_t i) { return rows_.at(i); }
  std::uint8_t at(std::size_t r, std::size_t c) const { return rows_.at(r).at(c); }
  const std::vector<Bits>& data() const noexcept { return rows_; }

  void push_row(Bits r) {
    if (rows_.empty() && cols_ == 0) cols_ = r.size();
    if (r.size() != cols_) throw DomainError("row length does not match matrix width");
    rows_.push_back(std::move(r));
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r)
      for (std::size_t c = 0; c < cols_; ++c) t.rows_[c][r] = rows_[r][c];
    return t;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t cols_ = 0;
  std::vector<Bits> rows_;
};

inline std::uint8_t dot(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  std::uint8_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc ^= a[i] & b[i];
  return acc;
}

// M * v.
inline Bits multiply(const Matrix& m, std::span<const std::uint8_t> v) {
  if (v.size() != m.cols()) throw DomainError("vector length does not match matrix width");
  Bits out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), v);
  return out;
}

// A * B^T; zero iff every row of A is orthogonal to every row of B.
inline Matrix multiply_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw DomainError("matrix widths differ");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) out.row(i)[j] = dot(a.row(i), b.row(j));
  return out;
}

inline bool is_zero(const Matrix& m) {
  for (const auto& r : m.data())
    for (auto b : r)
      if (b) return false;
  return true;
}

// Reduced row echelon form with zero rows dropped. `pivots` receives the
// pivot column of each remaining row.
inline Matrix rref(Matrix m, std::vector<std::size_t>* pivots = nullptr) {
  std::vector<Bits> rows = m.data();
  std::vector<std::size_t> piv;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < rows.size(); ++c) {
    std::size_t sel = r;
    while (sel < rows.size() && !rows[sel][c]) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[r], rows[sel]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i != r && rows[i][c])
        for (std::size_t k = 0; k < m.cols(); ++k) rows[i][k] ^= rows[r][k];
    }
    piv.push_back(c);
    ++r;
  }
  rows.resize(r);
  if (pivots) *pivots = std::move(piv);
  Matrix out(0, m.cols());
  for (auto& row : rows) out.push_row(std::move(row));
  return out;
}

inline std::size_t rank(const Matrix& m) { return rref(m).rows(); }

// Basis (as rows) of { x : M x = 0 }.
inline Matrix nullspace(const Matrix& m) {
  std::vector<std::size_t> pivots;
  const Matrix r = rref(m, &pivots);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto p : pivots) is_pivot[p] = true;
  Matrix out(0, m.cols());
  for (std::size_t free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    Bits v(m.cols(), 0);
    v[free] = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = r.at(i, free);
    out.push_row(std::move(v));
  }
  return out;
}

// Plain-text matrix: one row per line as '0'/'1' characters. Blank lines and
// lines starting with '#' are skipped; spaces inside a row are ignored.
inline Matrix parse_matrix(std::istream& in) {
  Matrix m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    Bits row;
    for (char c : line.substr(first)) {
      if (c == '0' || c == '1') row.push_back(static_cast<std::uint8_t>(c - '0'));
      else if (c != ' ' && c != '\t') throw ParseError(lineno, std::string("unexpected character '") + c + "' in matrix row");
    }
    if (m.rows() > 0 && row.size() != m.cols()) throw ParseError(lineno, "row length differs from the first row");
    m.push_row(std::move(row));
  }
  if (m.rows() == 0) throw ParseError(lineno, "matrix has no rows");
  return m;
}

inline Matrix parse_matrix(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_matrix(in);
}

inline std::string format_matrix(const Matrix& m) {
  std::string s;
  for (const auto& r : m.data()) {
    s += to_string(r);
    s.push_back('\n');
  }
  return s;
}

// Packs up to 64 bits, first bit most significant.
inline std::uint64_t pack(std::span<const std::uint8_t> bits) {
  std::uint64_t v = 0;
  for (auto b : bits) v = (v << 1) | b;
  return v;
}

// Binary linear [length, dimension] code with a syndrome decoding table for
// every error pattern of weight up to `radius`.
class LinearCode {
 public:
  static constexpr std::size_t kMaxEnumerableDimension = 24;

  // Builds the code spanned by the rows of `generator` (dependent rows are
  // dropped). The parity-check matrix is the null space of the generator.
  static LinearCode from_generator(const Matrix& generator) {
    LinearCode c;
    c.generator_ = rref(generator);
    c.length_ = generator.cols();
    if (c.generator_.rows() == 0) throw DomainError("generator spans the zero code");
    if (c.generator_.rows() > kMaxEnumerableDimension) throw DomainError("code dimension too large to enumerate");
    if (c.length_ - c.generator_.rows() > 63) throw DomainError("too many parity checks");
    c.parity_check_ = nullspace(c.generator_);
    c.distance_ = c.compute_distance();
    c.radius_ = (c.distance_ - 1) / 2;
    c.build_table();
    return c;
  }

  static LinearCode from_parity_check(const Matrix& parity_check) {
    return from_generator(nullspace(parity_check));
  }

  std::size_t length() const noexcept { return length_; }
  std::size_t dimension() const noexcept { return generator_.rows(); }
  std::size_t min_distance() const noexcept { return distance_; }
  std::size_t radius() const noexcept { return radius_; }
  const Matrix& generator() const noexcept { return generator_; }
  const Matrix& parity_check() const noexcept { return parity_check_; }
  std::size_t table_size() const noexcept { return table_.size(); }

  Bits syndrome(std::span<const std::uint8_t> word) const {
    if (word.size() != length_) throw DomainError("word length does not match code length");
    return multiply(parity_check_, word);
  }

  bool contains(std::span<const std::uint8_t> word) const { return weight(syndrome(word)) == 0; }

  Bits encode(std::span<const std::uint8_t> message) const {
    if (message.size() != dimension()) throw DomainError("message length does not match code dimension");
    Bits out(length_, 0);
    for (std::size_t r = 0; r < dimension(); ++r)
      if (message[r])
        for (std::size_t c = 0; c < length_; ++c) out[c] ^= generator_.at(r, c);
    return out;
  }

  std::vector<Bits> codewords() const {
    std::vector<Bits> out;
    const std::size_t k = dimension();
    out.reserve(std::size_t{1} << k);
    Bits msg(k, 0);
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << k); ++i) {
      for (std::size_t b = 0; b < k; ++b) msg[b] = static_cast<std::uint8_t>((i >> (k - 1 - b)) & 1u);
      out.push_back(encode(msg));
    }
    return out;
  }

  // Nearest codeword for words within the decoding radius. A syndrome with no
  // table entry (error weight beyond the radius) yields nullopt. Errors beyond
  // the radius can also land on a covered syndrome and decode to the wrong
  // codeword.
  std::optional<Bits> decode(std::span<const std::uint8_t> word) const {
    const auto it = table_.find(pack(syndrome(word)));
    if (it == table_.end()) return std::nullopt;
    return xor_bits(word, it->second);
  }

 private:
  std::size_t compute_distance() const {
    std::size_t best = length_;
    for (const auto& w : codewords()) {
      const auto wt = weight(w);
      if (wt > 0) best = std::min(best, wt);
    }
    return best;
  }

  // Enumerates error patterns by increasing weight, so each syndrome keeps a
  // minimum-weight pattern (lexicographically first among equals).
  void build_table() {
    Bits e(length_, 0);
    table_.emplace(pack(syndrome(e)), e);
    for (std::size_t w = 1; w <= radius_; ++w) {
      std::vector<std::size_t> idx(w);
      for (std::size_t i = 0; i < w; ++i) idx[i] = i;
      while (true) {
        Bits pattern(length_, 0);
        for (auto i : idx) pattern[i] = 1;
        table_.emplace(pack(syndrome(pattern)), std::move(pattern));
        std::size_t i = w;
        while (i > 0 && idx[i - 1] == length_ - w + (i - 1)) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < w; ++j) idx[j] = idx[j - 1] + 1;
      }
    }
  }

  std::size_t length_ = 0;
  std::size_t distance_ = 0;
  std::size_t radius_ = 0;
  Matrix generator_;
  Matrix parity_check_;
  std::unordered_map<std::uint64_t, Bits> table_;
};

// Parity checks of the [7,4] Hamming code: column c is the binary form of c.
inline Matrix hamming7_parity_check() {
  return Matrix({parse_bits("0001111"), parse_bits("0110011"), parse_bits("1010101")});
}

}  // namespace qss::gf2
