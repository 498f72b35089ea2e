#pragma once

#include <span>
#include <vector>

// Plain serial implementations of the fluctuation kernels, written
// independently of the OpenMP paths. Tests cross-check the production
// kernels against these and the benchmark compares their throughput.
namespace icd::ref {

std::vector<double> segment_fluctuations(std::span<const double> series, int s);

double dfa_fluctuation(std::span<const double> series, int s);
double cdma_fluctuation(std::span<const double> series, int s);
double fluctuation_function(std::span<const double> series, int s, double q);

}  // namespace icd::ref
