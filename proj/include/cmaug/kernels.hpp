// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_KERNELS_HPP
#define CMAUG_KERNELS_HPP

#include <cstddef>
#include <span>
#include <string>

// Dense double-precision primitives behind the numeric hot paths.
// Scalar reference implementations always exist; an AVX2 variant is
// selected at runtime when the CPU supports it. The two variants are
// equivalence-tested against each other (bitwise for elementwise ops,
// tight tolerance for reductions, whose summation order differs).
namespace cmaug::kern {

enum class Backend { scalar, avx2 };

// Backend in effect. Resolved once on first use: AVX2 if the CPU has it,
// unless the CMAUG_KERNELS environment variable ("scalar"/"avx2") says
// otherwise.
Backend active_backend();
bool backend_supported(Backend b);
// Test hook; throws std::invalid_argument if unsupported on this CPU.
void set_backend(Backend b);
std::string backend_name(Backend b);

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double max_value(std::span<const double> a);  // a must be non-empty

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void add(std::span<const double> a, std::span<const double> b, std::span<double> out);
void mul(std::span<const double> a, std::span<const double> b, std::span<double> out);
void scale(std::span<const double> a, double alpha, std::span<double> out);
void add_scalar(std::span<const double> a, double c, std::span<double> out);

// log(sum_i exp(a_i)) with max shift; -inf for empty or all -inf input.
double logsumexp(std::span<const double> a);
// Two-term log-space add, -inf safe.
double log_add(double a, double b);

// Transcendental maps stay scalar in every backend.
void tanh_vec(std::span<const double> a, std::span<double> out);
void logistic_vec(std::span<const double> a, std::span<double> out);

}  // namespace cmaug::kern

#endif  // CMAUG_KERNELS_HPP
