#include "ppct/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ppct {

Weights eaw(std::span<const double> d, const ErrorMap& eps) {
    if (!d.empty() && d.size() != eps.epsilon.size())
        throw std::invalid_argument("eaw: statistical weights and error map differ in length");
    Weights w;
    w.n = eps.n;
    w.c.resize(eps.epsilon.size());
    for (std::size_t i = 0; i < w.c.size(); ++i) {
        const double e = eps.epsilon[i];
        if (!(e >= 0.0))
            throw std::invalid_argument("eaw: error values must be nonnegative");
        const double conf = 1.0 / (1.0 + e);
        if (d.empty()) {
            w.c[i] = conf;
        } else {
            if (!(d[i] >= 0.0) || !std::isfinite(d[i]))
                throw std::invalid_argument("eaw: statistical weights must be finite and nonnegative");
            w.c[i] = std::sqrt(d[i]) * conf;
        }
    }
    if (!d.empty()) {
        const double peak = w.c.empty() ? 0.0 : *std::max_element(w.c.begin(), w.c.end());
        if (peak > 0.0)
            for (double& v : w.c)
                v /= peak;
    }
    return w;
}

Weights unit_weights(int n) {
    Weights w;
    w.n = n;
    w.c.assign(4 * static_cast<std::size_t>(n) * n, 1.0);
    return w;
}

std::vector<double> propagate_weights_to_ppgrid(std::span<const double> d_per_ray, std::size_t rays_per_angle,
                                                const AngleSet& angles, int n) {
    if (angles.angles.size() != 2 * static_cast<std::size_t>(n))
        throw std::invalid_argument("propagate_weights: angle set does not match n");
    if (rays_per_angle == 0 || d_per_ray.size() != angles.angles.size() * rays_per_angle)
        throw std::invalid_argument("propagate_weights: ray count does not match the angle set");
    std::vector<double> line(angles.angles.size());
    for (std::size_t a = 0; a < line.size(); ++a) {
        double sum = 0.0;
        for (std::size_t j = 0; j < rays_per_angle; ++j) {
            const double v = d_per_ray[a * rays_per_angle + j];
            if (!std::isfinite(v) || v < 0.0)
                throw std::invalid_argument("propagate_weights: d must be finite and nonnegative");
            sum += v;
        }
        line[a] = sum / static_cast<double>(rays_per_angle);
    }
    return broadcast_line_error(line, n).epsilon;
}

} // namespace ppct
