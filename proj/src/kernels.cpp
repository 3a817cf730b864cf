// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include "cmaug/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "kernels_detail.hpp"

namespace cmaug::kern {
namespace {

using detail::KernelTable;

struct Dispatch {
  const KernelTable* table;
  Backend backend;
};

Dispatch resolve_initial() {
  const char* env = std::getenv("CMAUG_KERNELS");
  if (env != nullptr) {
    std::string v(env);
    if (v == "scalar") return {&detail::scalar_table(), Backend::scalar};
    if (v == "avx2") {
      if (const KernelTable* t = detail::avx2_table()) return {t, Backend::avx2};
      throw std::runtime_error("CMAUG_KERNELS=avx2 but AVX2 is unavailable");
    }
    throw std::runtime_error("unknown CMAUG_KERNELS value: " + v);
  }
  if (const KernelTable* t = detail::avx2_table()) return {t, Backend::avx2};
  return {&detail::scalar_table(), Backend::scalar};
}

Dispatch& dispatch() {
  static Dispatch d = resolve_initial();
  return d;
}

}  // namespace

Backend active_backend() { return dispatch().backend; }

bool backend_supported(Backend b) {
  return b == Backend::scalar || detail::avx2_table() != nullptr;
}

void set_backend(Backend b) {
  if (b == Backend::scalar) {
    dispatch() = {&detail::scalar_table(), Backend::scalar};
    return;
  }
  const KernelTable* t = detail::avx2_table();
  if (t == nullptr) throw std::invalid_argument("AVX2 backend unsupported on this CPU");
  dispatch() = {t, Backend::avx2};
}

std::string backend_name(Backend b) {
  return b == Backend::scalar ? "scalar" : "avx2";
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  return dispatch().table->dot(a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) {
  return dispatch().table->sum(a.data(), a.size());
}

double max_value(std::span<const double> a) {
  if (a.empty()) throw std::invalid_argument("max_value: empty input");
  return dispatch().table->max_value(a.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  dispatch().table->axpy(alpha, x.data(), y.data(), x.size());
}

void add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  if (a.size() != b.size() || a.size() != out.size())
    throw std::invalid_argument("add: size mismatch");
  dispatch().table->add(a.data(), b.data(), out.data(), a.size());
}

void mul(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  if (a.size() != b.size() || a.size() != out.size())
    throw std::invalid_argument("mul: size mismatch");
  dispatch().table->mul(a.data(), b.data(), out.data(), a.size());
}

void scale(std::span<const double> a, double alpha, std::span<double> out) {
  if (a.size() != out.size()) throw std::invalid_argument("scale: size mismatch");
  dispatch().table->scale(a.data(), alpha, out.data(), a.size());
}

void add_scalar(std::span<const double> a, double c, std::span<double> out) {
  if (a.size() != out.size()) throw std::invalid_argument("add_scalar: size mismatch");
  dispatch().table->add_scalar(a.data(), c, out.data(), a.size());
}

double logsumexp(std::span<const double> a) {
  if (a.empty()) return -std::numeric_limits<double>::infinity();
  const double m = max_value(a);
  if (std::isinf(m) && m < 0) return m;  // all -inf
  double s = 0.0;
  for (double v : a) s += std::exp(v - m);
  return m + std::log(s);
}

double log_add(double a, double b) {
  if (std::isinf(a) && a < 0) return b;
  if (std::isinf(b) && b < 0) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

void tanh_vec(std::span<const double> a, std::span<double> out) {
  if (a.size() != out.size()) throw std::invalid_argument("tanh_vec: size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::tanh(a[i]);
}

void logistic_vec(std::span<const double> a, std::span<double> out) {
  if (a.size() != out.size()) throw std::invalid_argument("logistic_vec: size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-a[i]));
}

}  // namespace cmaug::kern
