#pragma once

// Dense 64-bit numeric primitives shared by every module.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace avf {

/// Dense real vector with dim >= 1.
class Vec {
 public:
  /// Zero vector of the given dimension. Throws InvalidArgument for dim 0.
  explicit Vec(std::size_t dim);
  Vec(std::size_t dim, double fill);
  explicit Vec(std::vector<double> entries);
  Vec(std::initializer_list<double> entries);

  std::size_t dim() const noexcept { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& entries() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool operator==(const Vec&) const = default;

 private:
  std::vector<double> data_;
};

/// Row-major dense matrix; rows, cols >= 1.
class Mat {
 public:
  Mat(std::size_t rows, std::size_t cols);
  Mat(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  /// Column c copied out as a vector.
  Vec column(std::size_t c) const;

  bool operator==(const Mat&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

struct ComplexVec {
  std::vector<double> re;
  std::vector<double> im;

  std::size_t size() const noexcept { return re.size(); }
};

/// Non-owning named view onto a parameter or gradient buffer. Vectors are
/// exposed as rows x 1.
struct TensorRef {
  std::string name;
  std::size_t rows;
  std::size_t cols;
  std::span<double> values;
};

TensorRef tensor_ref(std::string name, Mat& m);
TensorRef tensor_ref(std::string name, Vec& v);

// ---- scalar functions ----

/// Logistic function; stable for arbitrarily large |x|.
double sigmoid(double x) noexcept;

// ---- vector algebra ----

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
Vec concat(const Vec& a, const Vec& b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// y = M x
Vec matvec(const Mat& m, const Vec& x);
/// y = M^T x
Vec matvec_transposed(const Mat& m, const Vec& x);
/// M += alpha * x y^T
void add_outer(Mat& m, double alpha, const Vec& x, const Vec& y);

/// Throws NonFiniteValue naming `what` if any entry is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

// ---- Fourier transforms ----

/// Direct O(d^2) DFT, X[k] = sum_t x[t] e^{-2 pi i k t / d}.
ComplexVec dft(std::span<const double> x);
/// Inverse of dft(); returns the complex time-domain signal.
ComplexVec idft(const ComplexVec& spectrum);
/// Radix-2 in-place FFT. size must be a power of two.
void fft_inplace(std::span<double> re, std::span<double> im);
/// FFT of a real signal zero-padded to `size` (a power of two >= x.size()).
ComplexVec fft_real(std::span<const double> x, std::size_t size);

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

}  // namespace avf
