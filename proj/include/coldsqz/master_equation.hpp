#pragma once

// Exact single-atom reference: a driven cavity mode on a truncated Fock
// space coupled to one two-level atom. Quadrature spectra of the output field
// come from the quantum regression theorem applied to the Liouvillian, so
// they are free of the linearization used by output_spectrum().

#include "coldsqz/model.hpp"
#include "coldsqz/noise.hpp"

#include <span>
#include <vector>

namespace coldsqz {

struct OracleSteadyState {
    std::complex<double> field;  // <a>, photon units
    double photons = 0.0;        // <a^dag a>
    double tail_mass = 0.0;      // population of the highest retained Fock level
    double excited = 0.0;        // excited-state population
};

// Photon number of one saturation unit of intracavity intensity for a single
// atom (N = 1) at the coupling implied by params.C; infinite when C == 0.
double single_atom_saturation_photons(const ModelParams& params);

// `drive_photons` is the resonant empty-cavity photon number of the coherent
// drive, so a drive Y in saturation units corresponds to
// Y * single_atom_saturation_photons(params).
OracleSteadyState me_oracle_steady_state(const ModelParams& params, double drive_photons,
                                         int fock_cutoff = 15);

std::vector<QuadratureSpectrum> me_oracle_spectrum(const ModelParams& params,
                                                   double drive_photons,
                                                   std::span<const double> omega_hz,
                                                   int fock_cutoff = 15);

} // namespace coldsqz
