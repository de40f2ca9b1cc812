// Solves the relaxation scenario and prints a few nodes next to the
// Mittag-Leffler closed form.
#include <cstdio>

#include "hilfer/hilfer.hpp"

int main() {
    const auto p = hilfer::catalog("linear_relaxation", 1025);
    const auto res = hilfer::picard_solve(p, {1025, 1e-12, 500});
    std::printf("iterations %d  final_delta %.3e\n", res.report.iterations, res.report.final_delta);
    const auto& b = res.solution.branches.front();
    for (std::size_t j = 64; j < b.x.size(); j += 192) {
        std::printf("t=%.4f  x=%.8f  exact=%.8f\n", b.grid.t[j], b.x[j], p.exact(b.grid.t[j]));
    }
}
