#pragma once

#include "gdr/image.hpp"

namespace gdr {

// One-level undecimated Haar decomposition, all bands at full resolution.
// Along each axis: average a[n] = (x[n] + x[n+1])/2 and difference
// d[n] = (x[n] - x[n+1])/2, with the right edge reflected, so a + d = x
// exactly. Band naming is <row-filter><col-filter> with L = average and
// H = difference: a horizontal step edge (values varying along y) puts its
// energy in HL, a vertical edge in LH.
struct SwtBands {
    Image ll, lh, hl, hh;
};

SwtBands swt_decompose(const Image& img);
// Exact inverse: ll + lh + hl + hh.
Image swt_reconstruct(const SwtBands& bands);

// Adjoints of the four band operators (transposes of the linear maps),
// needed to backpropagate band-domain losses.
Image swt_band_adjoint(const Image& u, int band);  // 0=ll 1=lh 2=hl 3=hh

}  // namespace gdr
