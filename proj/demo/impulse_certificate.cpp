// Perturbs the single-impulse solution and checks the stability bound.
#include <cstdio>

#include "hilfer/hilfer.hpp"

int main() {
    const auto p = hilfer::catalog("single_impulse", 513);
    const hilfer::SolveOptions opt{513, 1e-12, 500};
    const auto y0 = hilfer::picard_solve(p, opt).solution;
    std::printf("C_phi %.5f  Phi %.5f\n", p.lip->c_phi(), p.lip->Phi());
    for (double amp : {1e-3, 1e-2, 1e-1}) {
        const auto y = hilfer::perturb(p, y0, {amp, hilfer::PerturbMode::random_smooth}, 7);
        const auto cert = hilfer::check_certificate(p, y, *p.lip, opt);
        std::printf("amplitude %.0e  lhs_max %.3e  bound_min %.3e  %s\n", amp, cert.lhs_max(), cert.bound_min(),
                    hilfer::to_string(cert.verdict));
    }
}
