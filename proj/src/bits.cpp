#include "qkd/bits.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace qkd {

namespace {

inline std::uint64_t tail_mask(std::size_t nbits) {
  std::size_t rem = nbits & 63;
  return rem == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << rem) - 1;
}

// in-place transpose of a 64x64 bit block, element (r,c) = bit c of a[r]
void transpose64(std::uint64_t a[64]) {
  std::uint64_t m = 0x00000000FFFFFFFFULL;
  for (int j = 32; j != 0; j >>= 1, m ^= m << j) {
    for (int k = 0; k < 64; k = ((k | j) + 1) & ~j) {
      std::uint64_t t = ((a[k] >> j) ^ a[k | j]) & m;
      a[k] ^= t << j;
      a[k | j] ^= t;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- BitVector

BitVector BitVector::from_string(std::string_view s) {
  BitVector v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1')
      v.set(i, true);
    else if (s[i] != '0')
      throw std::invalid_argument("bit string may contain only '0' and '1'");
  }
  return v;
}

std::size_t BitVector::weight() const {
  std::size_t c = 0;
  for (std::uint64_t w : w_) c += std::popcount(w);
  return c;
}

bool BitVector::is_zero() const {
  for (std::uint64_t w : w_)
    if (w != 0) return false;
  return true;
}

BitVector& BitVector::operator^=(const BitVector& o) {
  if (o.n_ != n_) throw DimensionError("BitVector xor: length mismatch");
  for (std::size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
  return *this;
}

std::string BitVector::to_string() const {
  std::string s(n_, '0');
  for (std::size_t i = 0; i < n_; ++i)
    if (get(i)) s[i] = '1';
  return s;
}

std::string BitVector::to_hex() const {
  static const char* digits = "0123456789abcdef";
  std::size_t nnib = (n_ + 3) / 4;
  std::string s(nnib, '0');
  for (std::size_t j = 0; j < nnib; ++j) {
    unsigned nib = 0;
    for (unsigned b = 0; b < 4; ++b) {
      std::size_t i = 4 * j + b;
      if (i < n_ && get(i)) nib |= 8u >> b;  // coordinate 4j is the MSB
    }
    s[j] = digits[nib];
  }
  return s;
}

BitVector BitVector::from_hex(std::string_view hex, std::size_t n) {
  std::size_t nnib = (n + 3) / 4;
  if (hex.size() != nnib)
    throw std::invalid_argument("hex string has wrong width for bit length");
  BitVector v(n);
  for (std::size_t j = 0; j < nnib; ++j) {
    char c = hex[j];
    unsigned nib;
    if (c >= '0' && c <= '9')
      nib = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f')
      nib = static_cast<unsigned>(c - 'a') + 10;
    else
      throw std::invalid_argument("invalid hex digit");
    for (unsigned b = 0; b < 4; ++b) {
      std::size_t i = 4 * j + b;
      bool bit = (nib >> (3 - b)) & 1;
      if (i < n)
        v.set(i, bit);
      else if (bit)
        throw std::invalid_argument("nonzero padding bits in hex string");
    }
  }
  return v;
}

std::uint64_t BitVector::to_index() const {
  if (n_ > 64) throw std::invalid_argument("to_index requires length <= 64");
  return w_.empty() ? 0 : w_[0];
}

BitVector BitVector::from_index(std::uint64_t v, std::size_t n) {
  if (n > 64) throw std::invalid_argument("from_index requires length <= 64");
  BitVector out(n);
  if (n > 0) out.w_[0] = v & tail_mask(n);
  return out;
}

BitVector BitVector::random(std::size_t n, Rng& rng) {
  BitVector v(n);
  for (std::size_t i = 0; i < v.w_.size(); ++i) v.w_[i] = rng.next_u64();
  if (!v.w_.empty()) v.w_.back() &= tail_mask(n);
  return v;
}

// ---------------------------------------------------------------- BitMatrix

BitMatrix BitMatrix::identity(std::size_t n) {
  BitMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
  return m;
}

BitMatrix BitMatrix::from_strings(const std::vector<std::string>& rows) {
  if (rows.empty()) throw std::invalid_argument("matrix needs at least one row");
  BitMatrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_)
      throw DimensionError("matrix rows have unequal length");
    for (std::size_t j = 0; j < m.cols_; ++j) {
      if (rows[i][j] == '1')
        m.set(i, j, true);
      else if (rows[i][j] != '0')
        throw std::invalid_argument("matrix text may contain only '0' and '1'");
    }
  }
  return m;
}

BitVector BitMatrix::row(std::size_t i) const {
  BitVector v(cols_);
  for (std::size_t w = 0; w < wpr_; ++w) v.words()[w] = w_[i * wpr_ + w];
  return v;
}

void BitMatrix::set_row(std::size_t i, const BitVector& v) {
  if (v.size() != cols_) throw DimensionError("set_row: length mismatch");
  for (std::size_t w = 0; w < wpr_; ++w) w_[i * wpr_ + w] = v.words()[w];
}

BitVector BitMatrix::column(std::size_t j) const {
  BitVector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    if (get(i, j)) v.set(i, true);
  return v;
}

BitMatrix BitMatrix::row_slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows_) throw DimensionError("row_slice out of range");
  BitMatrix m(end - begin, cols_);
  for (std::size_t i = begin; i < end; ++i)
    for (std::size_t w = 0; w < wpr_; ++w)
      m.w_[(i - begin) * wpr_ + w] = w_[i * wpr_ + w];
  return m;
}

BitMatrix BitMatrix::transpose() const {
  BitMatrix t(cols_, rows_);
  std::uint64_t block[64];
  for (std::size_t i0 = 0; i0 < rows_; i0 += 64) {
    for (std::size_t j0 = 0; j0 < cols_; j0 += 64) {
      std::size_t ih = std::min<std::size_t>(64, rows_ - i0);
      std::size_t jh = std::min<std::size_t>(64, cols_ - j0);
      for (std::size_t r = 0; r < ih; ++r)
        block[r] = w_[(i0 + r) * wpr_ + (j0 >> 6)];
      for (std::size_t r = ih; r < 64; ++r) block[r] = 0;
      transpose64(block);
      for (std::size_t c = 0; c < jh; ++c)
        t.w_[(j0 + c) * t.wpr_ + (i0 >> 6)] = block[c];
    }
  }
  return t;
}

std::size_t BitMatrix::rank() const {
  // forward elimination on a scratch copy; pivot = first row with a 1 in
  // the current column, in column order
  std::vector<std::uint64_t> a = w_;
  std::size_t r = 0;
  for (std::size_t col = 0; col < cols_ && r < rows_; ++col) {
    std::size_t cw = col >> 6;
    std::uint64_t cm = std::uint64_t{1} << (col & 63);
    std::size_t piv = rows_;
    for (std::size_t i = r; i < rows_; ++i) {
      if (a[i * wpr_ + cw] & cm) {
        piv = i;
        break;
      }
    }
    if (piv == rows_) continue;
    if (piv != r)
      for (std::size_t w = 0; w < wpr_; ++w)
        std::swap(a[piv * wpr_ + w], a[r * wpr_ + w]);
    const std::uint64_t* prow = a.data() + r * wpr_;
    for (std::size_t i = piv + 1; i < rows_; ++i) {
      if (a[i * wpr_ + cw] & cm) {
        std::uint64_t* irow = a.data() + i * wpr_;
        for (std::size_t w = cw; w < wpr_; ++w) irow[w] ^= prow[w];
      }
    }
    ++r;
  }
  return r;
}

BitMatrix BitMatrix::inverse() const {
  if (rows_ != cols_) throw DimensionError("inverse requires a square matrix");
  std::size_t n = rows_;
  // Gauss-Jordan on fused [A|I] rows; branchless elimination with a mask
  // per row keeps the inner loop vectorizable
  std::size_t fw = 2 * wpr_;
  std::vector<std::uint64_t> m(n * fw, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t w = 0; w < wpr_; ++w) m[i * fw + w] = w_[i * wpr_ + w];
    m[i * fw + wpr_ + (i >> 6)] = std::uint64_t{1} << (i & 63);
  }
  std::vector<std::uint64_t> piv_row(fw);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t cw = col >> 6;
    unsigned cb = col & 63;
    std::size_t piv = n;
    for (std::size_t i = col; i < n; ++i) {
      if ((m[i * fw + cw] >> cb) & 1) {
        piv = i;
        break;
      }
    }
    if (piv == n) throw SingularMatrixError();
    if (piv != col)
      for (std::size_t w = 0; w < fw; ++w)
        std::swap(m[piv * fw + w], m[col * fw + w]);
    std::copy(m.begin() + col * fw, m.begin() + (col + 1) * fw, piv_row.begin());
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t mask = ~((m[i * fw + cw] >> cb) & 1) + 1;
      std::uint64_t* row = m.data() + i * fw;
      // the pivot row is zero left of its pivot word
      for (std::size_t w = cw; w < wpr_; ++w) row[w] ^= mask & piv_row[w];
      for (std::size_t w = wpr_; w < fw; ++w) row[w] ^= mask & piv_row[w];
    }
    // the pivot row eliminated itself; put it back
    std::copy(piv_row.begin(), piv_row.end(), m.begin() + col * fw);
  }
  BitMatrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t w = 0; w < wpr_; ++w)
      inv.w_[i * wpr_ + w] = m[i * fw + wpr_ + w];
  return inv;
}

std::string BitMatrix::to_text() const {
  std::string s;
  s.reserve(rows_ * (cols_ + 1));
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) s += get(i, j) ? '1' : '0';
    s += '\n';
  }
  return s;
}

BitMatrix BitMatrix::from_text(std::string_view text) {
  std::vector<std::string> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    if (nl > pos) rows.emplace_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return from_strings(rows);
}

BitMatrix BitMatrix::random(std::size_t rows, std::size_t cols, Rng& rng) {
  BitMatrix m(rows, cols);
  std::uint64_t tm = tail_mask(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    std::uint64_t* r = m.row_ptr(i);
    for (std::size_t w = 0; w < m.wpr_; ++w) r[w] = rng.next_u64();
    r[m.wpr_ - 1] &= tm;
  }
  return m;
}

// --------------------------------------------------------------- operations

BitMatrix multiply(const BitMatrix& a, const BitMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("multiply: inner dimensions disagree");
  BitMatrix out(a.rows(), b.cols());
  std::size_t wpr = out.words_per_row();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::uint64_t* orow = out.row_ptr(i);
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (a.get(i, j)) {
        const std::uint64_t* brow = b.row_ptr(j);
        for (std::size_t w = 0; w < wpr; ++w) orow[w] ^= brow[w];
      }
    }
  }
  return out;
}

BitVector multiply(const BitMatrix& a, const BitVector& x) {
  if (a.cols() != x.size()) throw DimensionError("multiply: inner dimensions disagree");
  BitVector out(a.rows());
  std::size_t wpr = a.words_per_row();
  const std::uint64_t* xw = x.words().data();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const std::uint64_t* r = a.row_ptr(i);
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < wpr; ++w) acc ^= r[w] & xw[w];
    out.set(i, std::popcount(acc) & 1);
  }
  return out;
}

BitMatrix sample_invertible(std::size_t n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_invertible requires n >= 1");
  // Row-by-row rejection: draw each row uniformly and redraw it while it
  // lies in the span of the rows accepted so far. Conditioned on the
  // previous rows, every vector outside their span is equally likely, so
  // the result is uniform over the invertible matrices. The span test is
  // one elimination pass over a basis kept sorted by pivot: each basis
  // row's lowest set bit is its pivot, so eliminating pivots in ascending
  // order never reintroduces a cleared bit.
  BitMatrix m(n, n);
  std::size_t wpr = m.words_per_row();
  std::uint64_t tm = tail_mask(n);
  std::vector<std::uint64_t> basis;  // basis rows of wpr words, pivot order
  std::vector<std::size_t> pivot;    // ascending pivot columns
  std::vector<std::uint64_t> red(wpr);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t* row = m.row_ptr(i);
    for (;;) {
      for (std::size_t w = 0; w < wpr; ++w) row[w] = rng.next_u64();
      row[wpr - 1] &= tm;
      std::copy(row, row + wpr, red.begin());
      for (std::size_t b = 0; b < pivot.size(); ++b) {
        std::size_t p = pivot[b];
        std::uint64_t mask = ~((red[p >> 6] >> (p & 63)) & 1) + 1;
        const std::uint64_t* br = basis.data() + b * wpr;
        for (std::size_t w = p >> 6; w < wpr; ++w) red[w] ^= mask & br[w];
      }
      std::size_t p = n;
      for (std::size_t w = 0; w < wpr && p == n; ++w)
        if (red[w]) p = (w << 6) + std::countr_zero(red[w]);
      if (p == n) continue;  // in the span: redraw this row only
      std::size_t at =
          std::lower_bound(pivot.begin(), pivot.end(), p) - pivot.begin();
      pivot.insert(pivot.begin() + at, p);
      basis.insert(basis.begin() + at * wpr, red.begin(), red.end());
      break;
    }
  }
  return m;
}

BigInt count_full_rank(std::size_t k, std::size_t n) {
  if (k < 1 || k > n) throw std::invalid_argument("count_full_rank requires 1 <= k <= n");
  BigInt total = 1;
  BigInt two_n = BigInt(1) << n;
  for (std::size_t i = 1; i <= k; ++i) total *= two_n - (BigInt(1) << (i - 1));
  return total;
}

BigRational exact_collision_probability(std::size_t k, std::size_t n) {
  if (k < 1 || k > n) throw std::invalid_argument("requires 1 <= k <= n");
  BigInt num = (BigInt(1) << (n - k)) - 1;
  BigInt den = (BigInt(1) << n) - 1;
  return BigRational(num, den);
}

KeySchedule key_schedule(const BitMatrix& L, std::size_t k) {
  if (L.rows() != L.cols()) throw DimensionError("key_schedule: L must be square");
  std::size_t n = L.rows();
  if (2 * k >= n) throw std::invalid_argument("key_schedule requires 2k < n");
  KeySchedule ks;
  ks.n = n;
  ks.k = k;
  ks.L = L;
  ks.M = L.inverse().transpose();  // throws if singular
  ks.L1 = L.row_slice(0, k);
  ks.L2 = L.row_slice(k, 2 * k);
  ks.L3 = L.row_slice(2 * k, n);
  ks.M1 = ks.M.row_slice(0, k);
  ks.M2 = ks.M.row_slice(k, 2 * k);
  ks.M3 = ks.M.row_slice(2 * k, n);
  return ks;
}

namespace {

void full_rank_rec(std::size_t k, std::size_t n, std::vector<std::uint64_t>& rows,
                   std::vector<bool>& in_span,
                   const std::function<void(const BitMatrix&)>& fn) {
  if (rows.size() == k) {
    BitMatrix m(k, n);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < n; ++j)
        m.set(i, j, (rows[i] >> j) & 1);
    fn(m);
    return;
  }
  std::uint64_t space = std::uint64_t{1} << n;
  for (std::uint64_t v = 1; v < space; ++v) {
    if (in_span[v]) continue;
    // extend span by v
    std::vector<std::uint64_t> added;
    for (std::uint64_t s = 0; s < space; ++s) {
      if (in_span[s] && !in_span[s ^ v]) added.push_back(s ^ v);
    }
    for (std::uint64_t a : added) in_span[a] = true;
    rows.push_back(v);
    full_rank_rec(k, n, rows, in_span, fn);
    rows.pop_back();
    for (std::uint64_t a : added) in_span[a] = false;
  }
}

}  // namespace

void for_each_full_rank(std::size_t k, std::size_t n,
                        const std::function<void(const BitMatrix&)>& fn) {
  if (k < 1 || k > n) throw std::invalid_argument("requires 1 <= k <= n");
  if (n > 5) throw std::invalid_argument("for_each_full_rank is desk scale (n <= 5)");
  std::vector<std::uint64_t> rows;
  std::vector<bool> in_span(std::size_t{1} << n, false);
  in_span[0] = true;
  full_rank_rec(k, n, rows, in_span, fn);
}

}  // namespace qkd
