#include "coldsqz/master_equation.hpp"

#include "coldsqz/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace coldsqz {

namespace {

using cd = std::complex<double>;
using Dense = Eigen::MatrixXcd;
using Sparse = Eigen::SparseMatrix<cd>;
using Triplet = Eigen::Triplet<cd>;

// Liouvillian and operators for one atom in a truncated cavity. Density
// matrices are vectorized column-major, vec(A X B) = (B^T (x) A) vec(X).
class DrivenCavityAtom {
public:
    DrivenCavityAtom(const ModelParams& params, double drive_photons, int fock_cutoff)
    {
        params.validate();
        if (fock_cutoff < 1)
            throw DomainError("oracle: fock_cutoff must be >= 1");
        if (!(drive_photons >= 0.0))
            throw DomainError("oracle: drive photon number must be >= 0");
        if (params.gamma_par_ratio > 2.0)
            throw DomainError("oracle: gamma_par_ratio > 2 has no Lindblad form");

        const int levels = fock_cutoff + 1;
        dim_ = 2 * levels;
        const double kappa = params.kappa_hz;
        const double gamma = params.gamma_hz;
        const double gamma_par = params.gamma_par_ratio * gamma;
        const double dephasing = gamma - 0.5 * gamma_par;
        const double g = std::sqrt(2.0 * params.C * kappa * gamma);
        kappa_out_ = (1.0 - params.loss_fraction) * kappa;
        const double kappa_loss = params.loss_fraction * kappa;

        Dense a_cav = Dense::Zero(levels, levels);
        for (int k = 1; k < levels; ++k)
            a_cav(k - 1, k) = std::sqrt(static_cast<double>(k));
        Dense lower = Dense::Zero(2, 2); // |g><e|, index 0 = ground
        lower(0, 1) = 1.0;
        Dense sz = Dense::Zero(2, 2);
        sz(0, 0) = -1.0;
        sz(1, 1) = 1.0;

        a_ = Eigen::kroneckerProduct(a_cav, Dense::Identity(2, 2));
        sigma_ = Eigen::kroneckerProduct(Dense::Identity(levels, levels), lower);
        const Dense sigma_z = Eigen::kroneckerProduct(Dense::Identity(levels, levels), sz);
        const Dense ad = a_.adjoint();
        const Dense sd = sigma_.adjoint();

        const double drive = std::sqrt(drive_photons);
        const Dense H = kappa * params.theta * ad * a_ + gamma * params.delta * sd * sigma_
            + g * (ad * sigma_ + sd * a_) + cd(0.0, kappa * drive) * (ad - a_);

        std::vector<Dense> jumps{std::sqrt(2.0 * kappa_out_) * a_, std::sqrt(gamma_par) * sigma_};
        if (kappa_loss > 0.0)
            jumps.push_back(std::sqrt(2.0 * kappa_loss) * a_);
        if (dephasing > 0.0)
            jumps.push_back(std::sqrt(0.5 * dephasing) * sigma_z);

        const Sparse I = Dense::Identity(dim_, dim_).sparseView();
        const Sparse Hs = H.sparseView();
        Sparse L = cd(0.0, -1.0) * (Sparse(Eigen::kroneckerProduct(I, Hs))
                                    - Sparse(Eigen::kroneckerProduct(Sparse(H.transpose().sparseView()), I)));
        for (const Dense& c : jumps) {
            const Dense cdc = c.adjoint() * c;
            L += Sparse(Eigen::kroneckerProduct(Sparse(c.conjugate().sparseView()), Sparse(c.sparseView())));
            L -= 0.5 * Sparse(Eigen::kroneckerProduct(I, Sparse(cdc.sparseView())));
            L -= 0.5 * Sparse(Eigen::kroneckerProduct(Sparse(cdc.transpose().sparseView()), I));
        }
        L.makeCompressed();
        liouvillian_ = std::move(L);
        solve_steady_state(levels);
    }

    const Dense& rho() const { return rho_; }
    const Dense& a() const { return a_; }
    const Dense& sigma() const { return sigma_; }
    double tail_mass() const { return tail_mass_; }
    double kappa_out() const { return kappa_out_; }

    // Solves (s - L) Z = Y, tr Z = 0 for traceless Y through the bordered
    // matrix [[s - L, rho], [tr, 0]], nonsingular for every Re s >= 0.
    class Resolvent {
    public:
        Resolvent(const DrivenCavityAtom& sys, cd s)
            : dim_(sys.dim_)
        {
            const Eigen::Index D = static_cast<Eigen::Index>(dim_) * dim_;
            std::vector<Triplet> t;
            t.reserve(sys.liouvillian_.nonZeros() + 3 * D);
            for (int k = 0; k < sys.liouvillian_.outerSize(); ++k)
                for (Sparse::InnerIterator it(sys.liouvillian_, k); it; ++it)
                    t.emplace_back(it.row(), it.col(), -it.value());
            for (Eigen::Index i = 0; i < D; ++i)
                t.emplace_back(i, i, s);
            for (Eigen::Index i = 0; i < D; ++i)
                t.emplace_back(i, D, sys.rho_vec_(i));
            for (int i = 0; i < dim_; ++i)
                t.emplace_back(D, static_cast<Eigen::Index>(i) * dim_ + i, 1.0);
            Sparse m(D + 1, D + 1);
            m.setFromTriplets(t.begin(), t.end());
            m.makeCompressed();
            lu_.analyzePattern(m);
            lu_.factorize(m);
            if (lu_.info() != Eigen::Success)
                throw NumericalError("oracle: resolvent factorization failed");
        }

        Dense apply(const Dense& Y) const
        {
            const Eigen::Index D = static_cast<Eigen::Index>(dim_) * dim_;
            Eigen::VectorXcd rhs(D + 1);
            rhs.head(D) = Eigen::Map<const Eigen::VectorXcd>(Y.data(), D);
            rhs(D) = 0.0;
            const Eigen::VectorXcd z = lu_.solve(rhs);
            return Eigen::Map<const Dense>(z.data(), dim_, dim_);
        }

    private:
        int dim_;
        Eigen::SparseLU<Sparse> lu_;
    };

private:
    void solve_steady_state(int levels)
    {
        const Eigen::Index D = static_cast<Eigen::Index>(dim_) * dim_;
        std::vector<Triplet> t;
        t.reserve(liouvillian_.nonZeros() + dim_);
        for (int k = 0; k < liouvillian_.outerSize(); ++k)
            for (Sparse::InnerIterator it(liouvillian_, k); it; ++it)
                if (it.row() != 0)
                    t.emplace_back(it.row(), it.col(), it.value());
        for (int i = 0; i < dim_; ++i)
            t.emplace_back(0, static_cast<Eigen::Index>(i) * dim_ + i, 1.0);
        Sparse m(D, D);
        m.setFromTriplets(t.begin(), t.end());
        m.makeCompressed();
        Eigen::SparseLU<Sparse> lu;
        lu.analyzePattern(m);
        lu.factorize(m);
        if (lu.info() != Eigen::Success)
            throw NumericalError("oracle: steady-state factorization failed");
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(D);
        rhs(0) = 1.0;
        rho_vec_ = lu.solve(rhs);
        rho_ = Eigen::Map<const Dense>(rho_vec_.data(), dim_, dim_);
        rho_ = 0.5 * (rho_ + rho_.adjoint()).eval();
        rho_ /= rho_.trace();
        rho_vec_ = Eigen::Map<const Eigen::VectorXcd>(rho_.data(), D);

        tail_mass_ = rho_(dim_ - 2, dim_ - 2).real() + rho_(dim_ - 1, dim_ - 1).real();
        (void)levels;
    }

    int dim_ = 0;
    double kappa_out_ = 0.0;
    Dense a_, sigma_, rho_;
    Eigen::VectorXcd rho_vec_;
    Sparse liouvillian_;
    double tail_mass_ = 0.0;
};

constexpr double kTailTolerance = 1e-8;

void check_tail(const DrivenCavityAtom& sys, int fock_cutoff)
{
    if (sys.tail_mass() > kTailTolerance) {
        std::ostringstream msg;
        msg << "oracle: Fock cutoff " << fock_cutoff << " too small, top-level population "
            << sys.tail_mass() << " > " << kTailTolerance;
        throw NumericalError(msg.str());
    }
}

} // namespace

double single_atom_saturation_photons(const ModelParams& params)
{
    params.validate();
    const double gamma = params.gamma_hz;
    const double gamma_par = params.gamma_par_ratio * gamma;
    const double g2 = 2.0 * params.C * params.kappa_hz * gamma;
    if (g2 == 0.0)
        return std::numeric_limits<double>::infinity();
    return gamma * gamma_par / (4.0 * g2);
}

OracleSteadyState me_oracle_steady_state(const ModelParams& params, double drive_photons,
                                         int fock_cutoff)
{
    const DrivenCavityAtom sys(params, drive_photons, fock_cutoff);
    check_tail(sys, fock_cutoff);
    OracleSteadyState out;
    out.field = (sys.a() * sys.rho()).trace();
    out.photons = (sys.a().adjoint() * sys.a() * sys.rho()).trace().real();
    out.excited = (sys.sigma().adjoint() * sys.sigma() * sys.rho()).trace().real();
    out.tail_mass = sys.tail_mass();
    return out;
}

std::vector<QuadratureSpectrum> me_oracle_spectrum(const ModelParams& params, double drive_photons,
                                                   std::span<const double> omega_hz, int fock_cutoff)
{
    const DrivenCavityAtom sys(params, drive_photons, fock_cutoff);
    check_tail(sys, fock_cutoff);

    const Dense& rho = sys.rho();
    const Dense& a = sys.a();
    const Dense ad = a.adjoint();
    // Mean-subtracted regression seeds for <a(t) a(0)>, <a^dag(t) a(0)> and
    // <a^dag(0) a(t)>, <a^dag(0) a^dag(t)>.
    Dense after_a = a * rho;
    after_a -= after_a.trace() * rho;
    Dense before_ad = rho * ad;
    before_ad -= before_ad.trace() * rho;

    std::vector<QuadratureSpectrum> spectra;
    spectra.reserve(omega_hz.size());
    for (double omega : omega_hz) {
        if (!(omega >= 0.0))
            throw DomainError("oracle: analysis frequencies must be >= 0");
        // int_0^inf cos(omega t) e^{L t} dt = [(-i omega - L)^-1 + (i omega - L)^-1] / 2
        const DrivenCavityAtom::Resolvent minus(sys, cd(0.0, -omega));
        const DrivenCavityAtom::Resolvent plus(sys, cd(0.0, omega));
        const Dense z1 = 0.5 * (minus.apply(after_a) + plus.apply(after_a));
        const Dense z2 = 0.5 * (minus.apply(before_ad) + plus.apply(before_ad));

        const cd aa = (a * z1).trace();     // <da(t) da(0)>
        const cd ad_a = (ad * z1).trace();  // <da^dag(t) da(0)>
        const cd a_ad = (a * z2).trace();   // <da^dag(0) da(t)>
        const cd adad = (ad * z2).trace();  // <da^dag(0) da^dag(t)>

        auto quadrature = [&](double phi) {
            const cd e2 = std::exp(cd(0.0, -2.0 * phi));
            const cd normal = e2 * aa + std::conj(e2) * adad + a_ad + ad_a;
            return 1.0 + 4.0 * sys.kappa_out() * normal.real();
        };
        QuadratureSpectrum q;
        q.omega_hz = omega;
        q.V(0, 0) = quadrature(0.0);
        q.V(1, 1) = quadrature(0.5 * std::numbers::pi);
        q.V(0, 1) = q.V(1, 0) = quadrature(0.25 * std::numbers::pi) - 0.5 * (q.V(0, 0) + q.V(1, 1));
        const QuadratureExtrema e = quadrature_extrema(q.V);
        q.s_min = e.s_min;
        q.s_max = e.s_max;
        q.theta_min = e.theta_min;
        spectra.push_back(q);
    }
    return spectra;
}

} // namespace coldsqz
