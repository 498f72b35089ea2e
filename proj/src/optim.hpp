#pragma once

#include <array>
#include <cmath>
#include <functional>

namespace icd::detail {

struct Minimum2d {
    std::array<double, 2> x{};
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Nelder-Mead on two unconstrained coordinates. Convergence is declared when
// the simplex collapses below tol in the max-norm; after the first
// convergence the simplex is re-seeded once at the incumbent to verify it.
inline Minimum2d nelder_mead_2d(const std::function<double(double, double)>& f,
                                std::array<double, 2> x0, std::array<double, 2> step,
                                double tol, int max_iter) {
    struct Vertex {
        std::array<double, 2> x;
        double fx;
    };
    auto eval = [&](const std::array<double, 2>& p) { return f(p[0], p[1]); };

    Minimum2d result;
    int iter = 0;
    int restarts_left = 1;

    std::array<Vertex, 3> v;
    auto seed = [&](const std::array<double, 2>& origin) {
        v[0] = {origin, eval(origin)};
        v[1] = {{origin[0] + step[0], origin[1]}, 0.0};
        v[1].fx = eval(v[1].x);
        v[2] = {{origin[0], origin[1] + step[1]}, 0.0};
        v[2].fx = eval(v[2].x);
    };
    seed(x0);

    while (iter < max_iter) {
        ++iter;
        // order best..worst
        if (v[0].fx > v[1].fx) std::swap(v[0], v[1]);
        if (v[1].fx > v[2].fx) std::swap(v[1], v[2]);
        if (v[0].fx > v[1].fx) std::swap(v[0], v[1]);

        const double size = std::max(
            std::max(std::fabs(v[1].x[0] - v[0].x[0]), std::fabs(v[2].x[0] - v[0].x[0])),
            std::max(std::fabs(v[1].x[1] - v[0].x[1]), std::fabs(v[2].x[1] - v[0].x[1])));
        if (size < tol) {
            if (restarts_left-- > 0) {
                seed(v[0].x);
                continue;
            }
            result.converged = true;
            break;
        }

        const std::array<double, 2> centroid{(v[0].x[0] + v[1].x[0]) / 2.0,
                                             (v[0].x[1] + v[1].x[1]) / 2.0};
        auto along = [&](double t) {
            return std::array<double, 2>{centroid[0] + t * (v[2].x[0] - centroid[0]),
                                         centroid[1] + t * (v[2].x[1] - centroid[1])};
        };

        const auto xr = along(-1.0);
        const double fr = eval(xr);
        if (fr < v[0].fx) {
            const auto xe = along(-2.0);
            const double fe = eval(xe);
            v[2] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
        } else if (fr < v[1].fx) {
            v[2] = {xr, fr};
        } else {
            const bool outside = fr < v[2].fx;
            const auto xc = along(outside ? -0.5 : 0.5);
            const double fc = eval(xc);
            if (fc < (outside ? fr : v[2].fx)) {
                v[2] = {xc, fc};
            } else {
                for (int i = 1; i < 3; ++i) {
                    v[i].x = {v[0].x[0] + 0.5 * (v[i].x[0] - v[0].x[0]),
                              v[0].x[1] + 0.5 * (v[i].x[1] - v[0].x[1])};
                    v[i].fx = eval(v[i].x);
                }
            }
        }
    }

    if (v[0].fx > v[1].fx) std::swap(v[0], v[1]);
    if (v[1].fx > v[2].fx) std::swap(v[1], v[2]);
    if (v[0].fx > v[1].fx) std::swap(v[0], v[1]);
    result.x = v[0].x;
    result.fx = v[0].fx;
    result.iterations = iter;
    return result;
}

}  // namespace icd::detail
