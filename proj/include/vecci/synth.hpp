#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "vecci/graph.hpp"
#include "vecci/rng.hpp"
#include "vecci/stats.hpp"

namespace vecci::synth {

enum class Mechanism { Linear, Quadratic };

std::string to_string(Mechanism m);
Mechanism mechanism_from_string(const std::string& name);

// Ground-truth generative model over two groups: X follows its internal
// linear SCM, the Y-noise vector follows its own SCM over eta_y_dag, and
// Y = interaction * f(X) + noise_Y with f identity (linear) or entrywise
// square (quadratic).  Node ids are canonical: X = 0..n-1, Y = n..n+m-1.
struct LinearGroupModel {
    graph::GroupedDag structure;
    std::map<std::pair<int, int>, double> internal_coeffs;  // in-group edge -> weight
    Eigen::MatrixXd interaction;                            // m x n, support = cross edges
    std::vector<double> noise_variances;                    // length n + m
    graph::Dag eta_y_dag;                                   // Y-noise SCM, local ids 0..m-1
    Mechanism mechanism = Mechanism::Linear;
};

struct ModelParams {
    int n = 3;
    int m = 3;
    int sample_size = 100;
    double dens_x = 0.1;
    double dens_y = 0.1;
    double dens_a = 0.5;
    double effect_lo = 0.0;   // effect interval; entries drawn from +/-[lo, hi]
    double effect_hi = 0.7;
    Mechanism mechanism = Mechanism::Linear;
    std::uint64_t seed = 0;   // provenance only; callers build the Rng from it
};

// Throws input_error when a field is outside its hard range (n,m >= 1,
// sample_size >= 2, densities in [0,1], 0 <= effect_lo <= effect_hi finite).
void validate(const ModelParams& params);

struct SampleResult {
    LinearGroupModel model;
    stats::DataMatrix data;
};

// Draws structure, coefficients, noise variances and a data sample from one
// rng stream, in a fixed documented order, so equal seeds give equal bytes.
// Columns are named x1..xn, y1..ym.
SampleResult sample_model(const ModelParams& params, Rng& rng);

// Sample N rows from an existing model (noise drawn node-major: all rows of
// node 0, then node 1, ...).
stats::DataMatrix sample_data(const LinearGroupModel& model, int sample_size, Rng& rng);

// Four-variable toy model: X2 = a*X1 + sqrt(1-a^2)*e, Y1 = b*X1 + eta1,
// Y2 = c*X2 + eta2 with eta2 = d*eta1 + sqrt(1-d^2)*e'; all base noises are
// standard normal, so corr(Y1,Y2) = (abc+d)/sqrt((1+b^2)(1+c^2)).
stats::DataMatrix example1_sample(double a, double b, double c, double d, int sample_size,
                                  Rng& rng);

}  // namespace vecci::synth
