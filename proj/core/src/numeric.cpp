#include "avf/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "avf/error.hpp"

namespace avf {

Vec::Vec(std::size_t dim) : Vec(dim, 0.0) {}

Vec::Vec(std::size_t dim, double fill) : data_(dim, fill) {
  if (dim == 0) throw InvalidArgument("Vec requires dim >= 1");
}

Vec::Vec(std::vector<double> entries) : data_(std::move(entries)) {
  if (data_.empty()) throw InvalidArgument("Vec requires dim >= 1");
}

Vec::Vec(std::initializer_list<double> entries) : Vec(std::vector<double>(entries)) {}

Mat::Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  if (rows == 0 || cols == 0) throw InvalidArgument("Mat requires rows, cols >= 1");
}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (rows == 0 || cols == 0) throw InvalidArgument("Mat requires rows, cols >= 1");
  if (data_.size() != rows * cols) {
    throw DimMismatch("Mat entries " + std::to_string(data_.size()) + " != " +
                      std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Vec Mat::column(std::size_t c) const {
  Vec out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

TensorRef tensor_ref(std::string name, Mat& m) {
  return {std::move(name), m.rows(), m.cols(), m.values()};
}

TensorRef tensor_ref(std::string name, Vec& v) {
  return {std::move(name), v.dim(), 1, v.values()};
}

double sigmoid(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimMismatch("dot: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Vec concat(const Vec& a, const Vec& b) {
  std::vector<double> out;
  out.reserve(a.dim() + b.dim());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return Vec(std::move(out));
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimMismatch("axpy size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vec matvec(const Mat& m, const Vec& x) {
  if (m.cols() != x.dim()) {
    throw DimMismatch("matvec: matrix has " + std::to_string(m.cols()) + " cols, vector dim " +
                      std::to_string(x.dim()));
  }
  Vec y(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) s += m(r, c) * x[c];
    y[r] = s;
  }
  return y;
}

Vec matvec_transposed(const Mat& m, const Vec& x) {
  if (m.rows() != x.dim()) {
    throw DimMismatch("matvec_transposed: matrix has " + std::to_string(m.rows()) +
                      " rows, vector dim " + std::to_string(x.dim()));
  }
  Vec y(m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double xr = x[r];
    for (std::size_t c = 0; c < m.cols(); ++c) y[c] += m(r, c) * xr;
  }
  return y;
}

void add_outer(Mat& m, double alpha, const Vec& x, const Vec& y) {
  if (m.rows() != x.dim() || m.cols() != y.dim()) throw DimMismatch("add_outer shape mismatch");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double ax = alpha * x[r];
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) += ax * y[c];
  }
}

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NonFiniteValue(std::string(what) + " has non-finite entry at index " +
                           std::to_string(i));
    }
  }
}

ComplexVec dft(std::span<const double> x) {
  const std::size_t d = x.size();
  if (d == 0) throw InvalidArgument("dft of empty input");
  ComplexVec out{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t k = 0; k < d; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
      // (k*t) mod d keeps the angle small so large d does not lose precision.
      const double angle =
          -2.0 * std::numbers::pi * static_cast<double>((k * t) % d) / static_cast<double>(d);
      re += x[t] * std::cos(angle);
      im += x[t] * std::sin(angle);
    }
    out.re[k] = re;
    out.im[k] = im;
  }
  return out;
}

ComplexVec idft(const ComplexVec& spectrum) {
  const std::size_t d = spectrum.size();
  if (d == 0 || spectrum.im.size() != d) throw DimMismatch("idft: malformed spectrum");
  ComplexVec out{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t t = 0; t < d; ++t) {
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double angle =
          2.0 * std::numbers::pi * static_cast<double>((k * t) % d) / static_cast<double>(d);
      const double c = std::cos(angle), s = std::sin(angle);
      re += spectrum.re[k] * c - spectrum.im[k] * s;
      im += spectrum.re[k] * s + spectrum.im[k] * c;
    }
    out.re[t] = re / static_cast<double>(d);
    out.im[t] = im / static_cast<double>(d);
  }
  return out;
}

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::span<double> re, std::span<double> im) {
  const std::size_t n = re.size();
  if (im.size() != n) throw DimMismatch("fft: re/im length mismatch");
  if (!is_power_of_two(n)) throw InvalidArgument("fft size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t j = 0; j < half; ++j) {
      // Twiddles computed directly per index rather than by recurrence.
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) /
                           static_cast<double>(len);
      const double wr = std::cos(angle), wi = std::sin(angle);
      for (std::size_t i = j; i < n; i += len) {
        const std::size_t k = i + half;
        const double tr = re[k] * wr - im[k] * wi;
        const double ti = re[k] * wi + im[k] * wr;
        re[k] = re[i] - tr;
        im[k] = im[i] - ti;
        re[i] += tr;
        im[i] += ti;
      }
    }
  }
}

ComplexVec fft_real(std::span<const double> x, std::size_t size) {
  if (size < x.size()) throw InvalidArgument("fft size smaller than input");
  ComplexVec out{std::vector<double>(size, 0.0), std::vector<double>(size, 0.0)};
  std::copy(x.begin(), x.end(), out.re.begin());
  fft_inplace(out.re, out.im);
  return out;
}

}  // namespace avf
