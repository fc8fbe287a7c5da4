#include "pusmi/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "pusmi/common.hpp"

namespace pusmi::quad {

namespace {

// Kronrod abscissae (positive half, descending) and weights; odd indices are
// the 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
};

Piece gk15(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[static_cast<std::size_t>(j)];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kWgk[static_cast<std::size_t>(j)] * sum;
        if (j % 2 == 1) gauss += kWg[static_cast<std::size_t>(j / 2)] * sum;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b, double abs_tol, double rel_tol,
                 int max_intervals) {
    if (!(b > a)) return {0.0, 0.0, 0};
    std::priority_queue<Piece> heap;
    Piece first = gk15(f, a, b);
    int evals = 15;
    double total = first.value;
    double error = first.error;
    heap.push(first);
    while (error > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (static_cast<int>(heap.size()) >= max_intervals)
            throw NumericError("quadrature did not converge: error estimate " + std::to_string(error));
        const Piece worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Piece left = gk15(f, worst.a, mid);
        const Piece right = gk15(f, mid, worst.b);
        evals += 30;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if (!std::isfinite(total)) throw NumericError("quadrature produced a non-finite value");
    }
    // Re-sum so the returned value carries no drift from the running updates.
    double value = 0.0;
    double err = 0.0;
    std::vector<Piece> pieces;
    while (!heap.empty()) {
        pieces.push_back(heap.top());
        heap.pop();
    }
    std::sort(pieces.begin(), pieces.end(), [](const Piece& x, const Piece& y) { return x.a < y.a; });
    for (const Piece& p : pieces) {
        value += p.value;
        err += p.error;
    }
    return {value, err, evals};
}

Result integrate_2d(const std::function<double(double, double)>& f, double ax, double bx, double ay, double by,
                    double abs_tol, double rel_tol) {
    int evals = 0;
    const double inner_abs = abs_tol / std::max(1.0, bx - ax) * 1e-2;
    auto outer = [&](double x) {
        const Result r = integrate([&](double y) { return f(x, y); }, ay, by, inner_abs, rel_tol * 1e-2);
        evals += r.evaluations;
        return r.value;
    };
    Result r = integrate(outer, ax, bx, abs_tol, rel_tol);
    r.evaluations = evals;
    return r;
}

}  // namespace pusmi::quad
