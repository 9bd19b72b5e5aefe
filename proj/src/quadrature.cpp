#include "heatopt/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace heatopt {

namespace {

TriangleRule make_rule(int order) {
    TriangleRule r;
    if (order <= 1) {
        r.bary = {{1.0 / 3, 1.0 / 3, 1.0 / 3}};
        r.weights = {1.0};
    } else if (order == 2) {
        r.bary = {{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}};
        r.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    } else if (order <= 4) {
        // Dunavant degree-4 rule.
        const double a1 = 0.445948490915965, w1 = 0.223381589678011;
        const double a2 = 0.091576213509771, w2 = 0.109951743655322;
        for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
            const double b = 1.0 - 2.0 * a;
            r.bary.push_back({a, a, b});
            r.bary.push_back({a, b, a});
            r.bary.push_back({b, a, a});
            r.weights.insert(r.weights.end(), {w, w, w});
        }
    } else {
        throw std::invalid_argument("unsupported triangle quadrature order " + std::to_string(order));
    }
    return r;
}

LineRule make_line(int n) {
    LineRule r;
    std::vector<double> x, w;
    switch (n) {
        case 1: x = {0.0}; w = {2.0}; break;
        case 2: x = {-1 / std::sqrt(3.0), 1 / std::sqrt(3.0)}; w = {1.0, 1.0}; break;
        case 3: x = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)}; w = {5.0 / 9, 8.0 / 9, 5.0 / 9}; break;
        case 4: {
            const double p = std::sqrt(3.0 / 7 - 2.0 / 7 * std::sqrt(1.2));
            const double q = std::sqrt(3.0 / 7 + 2.0 / 7 * std::sqrt(1.2));
            const double wp = (18 + std::sqrt(30.0)) / 36, wq = (18 - std::sqrt(30.0)) / 36;
            x = {-q, -p, p, q};
            w = {wq, wp, wp, wq};
            break;
        }
        case 5: {
            const double p = std::sqrt(5 - 2 * std::sqrt(10.0 / 7)) / 3;
            const double q = std::sqrt(5 + 2 * std::sqrt(10.0 / 7)) / 3;
            const double wp = (322 + 13 * std::sqrt(70.0)) / 900, wq = (322 - 13 * std::sqrt(70.0)) / 900;
            x = {-q, -p, 0.0, p, q};
            w = {wq, wp, 128.0 / 225, wp, wq};
            break;
        }
        default: throw std::invalid_argument("unsupported Gauss-Legendre size " + std::to_string(n));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.nodes.push_back(0.5 * (x[i] + 1.0));
        r.weights.push_back(0.5 * w[i]);
    }
    return r;
}

}  // namespace

const TriangleRule& triangle_rule(int order) {
    static const TriangleRule r1 = make_rule(1), r2 = make_rule(2), r4 = make_rule(4);
    if (order <= 1) return r1;
    if (order == 2) return r2;
    if (order <= 4) return r4;
    throw std::invalid_argument("unsupported triangle quadrature order " + std::to_string(order));
}

const LineRule& gauss_legendre01(int n) {
    static const LineRule rules[5] = {make_line(1), make_line(2), make_line(3), make_line(4), make_line(5)};
    if (n < 1 || n > 5) throw std::invalid_argument("unsupported Gauss-Legendre size " + std::to_string(n));
    return rules[n - 1];
}

}  // namespace heatopt
