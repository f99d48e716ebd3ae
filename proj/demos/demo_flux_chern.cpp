// Demo: quantized area pairing for a magnetic torus model.
//
// A Harper model with rational flux p/q has magnetic bands; filling the bands
// below the largest gap gives a projector whose area pairing (the two-cocycle
// pairing with the unit cell area) is a Chern number times a universal
// constant.  The demo computes the pairing at one flux, compares the ratio to
// the Fukui–Hatsugai–Suzuki lattice Chern number, and checks the flux
// counting rule.

#include "bhi/torus.hpp"

#include <cstdio>

using namespace bhi;

int main() {
  const int p = 1, q = 8, grid = 32;
  FluxTorusModel model{p, q, 1.0, 0.2};

  BandScan scan = scan_bands(model, 64);
  GapChoice gap = scan.chosen();
  std::printf("flux %d/%d Harper model, %dx%d sample grid\n", p, q, grid, grid);
  std::printf("largest spectral gap: width %.6f, %d band(s) below, fermi level %.6f\n",
              gap.width, gap.bands_below, gap.fermi());

  ProjectorFamily fam = fermi_projector_family(model, grid, gap.fermi());
  TorusHoppings hop = torus_hoppings(fam, 1e-13);
  std::printf("projector hopping matrix: reach %d, dropped mass %.3e\n", hop.reach,
              hop.dropped_mass);

  Cplx pairing = torus_area_pairing(hop);
  int chern = fhs_chern(fam, gap.bands_below);
  int counting = diophantine_chern(p, q, gap.bands_below);
  std::printf("\narea pairing     = %.12f%+.12fi\n", pairing.real(), pairing.imag());
  std::printf("pairing / (i/pi) = %.12f\n", pairing.imag() * std::numbers::pi);
  std::printf("lattice chern    = %d (flux counting rule: %d)\n", chern, counting);
  return 0;
}
