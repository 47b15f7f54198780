"""Pure-numpy implementations of the hot kernels.

Used when the compiled extension is unavailable; also serves as the
reference the compiled backend is tested against.
"""

import numpy as np
import scipy.fft


def plane_block_stats(plane, block_size, basis, weights):
    """Texture energy and DC brightness per block of a pre-padded plane.

    plane: (H, W) float64 with both dimensions multiples of block_size.
    basis is the orthonormal DCT-II matrix (unused here; scipy computes the
    transform directly); weights are the energy weights, weights[0, 0] == 0.

    Returns (energies, lumas) over blocks in row-major order:
    energies[k] = sum(weights * |coef|) / w^2, lumas[k] = coef[0, 0] / w.
    """
    plane = np.asarray(plane, dtype=np.float64)
    h, width = plane.shape
    w = block_size
    if h % w or width % w:
        raise ValueError("plane dimensions must be multiples of the block size")
    blocks = plane.reshape(h // w, w, width // w, w).swapaxes(1, 2)
    coef = scipy.fft.dctn(blocks, type=2, axes=(2, 3), norm="ortho")
    energies = np.tensordot(np.abs(coef), weights, axes=([2, 3], [0, 1])) / (w * w)
    lumas = coef[..., 0, 0] / w
    return energies.reshape(-1), lumas.reshape(-1)


def _pair_views(patch, dy, dx):
    h, w = patch.shape
    ya, yb = (0, dy) if dy >= 0 else (-dy, 0)
    xa, xb = (0, dx) if dx >= 0 else (-dx, 0)
    nh, nw = h - abs(dy), w - abs(dx)
    if nh <= 0 or nw <= 0:
        raise ValueError(
            f"offset ({dy}, {dx}) leaves no sample pairs in a {h}x{w} patch"
        )
    a = patch[ya : ya + nh, xa : xa + nw]
    b = patch[yb : yb + nh, xb : xb + nw]
    return a.ravel(), b.ravel()


def glcm_feature_batch(patches, dy, dx, levels):
    """Haralick features of the symmetric normalized GLCM, per patch.

    patches: (n, Q, Q) unsigned integer samples, all values < levels.
    Returns (n, 6) float64 columns: contrast, dissimilarity, homogeneity,
    angular second moment, energy, correlation (:= 1 for zero variance).
    """
    patches = np.asarray(patches)
    out = np.empty((patches.shape[0], 6), dtype=np.float64)
    for k in range(patches.shape[0]):
        out[k] = _single_patch_features(patches[k], dy, dx, levels)
    return out


def _single_patch_features(patch, dy, dx, levels):
    if patch.max(initial=0) >= levels:
        raise ValueError(f"sample value >= levels ({levels})")
    a, b = _pair_views(patch.astype(np.int64), dy, dx)
    n_dir = a.size
    total = 2 * n_dir

    diff = a - b
    d2 = diff * diff
    s_d2 = int(d2.sum())
    s_absd = int(np.abs(diff).sum())
    s_hom = float((1.0 / (1.0 + d2)).sum())
    s_ab = int((a * b).sum())
    s_apb = int((a + b).sum())
    s_a2b2 = int((a * a + b * b).sum())

    contrast = s_d2 / n_dir
    dissimilarity = s_absd / n_dir
    homogeneity = s_hom / n_dir

    codes = np.concatenate([a * levels + b, b * levels + a])
    _, counts = np.unique(codes, return_counts=True)
    asm_int = int((counts.astype(np.int64) ** 2).sum())
    asm = asm_int / (total * total)
    energy = np.sqrt(asm)

    mu = s_apb / total
    var = s_a2b2 / total - mu * mu
    if var <= 0.0:
        correlation = 1.0
    else:
        correlation = (s_ab / n_dir - mu * mu) / var
    return contrast, dissimilarity, homogeneity, asm, energy, correlation


def best_split(X, y, min_leaf):
    """Best CART split (MSE criterion) over all features.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values; ties in gain keep the lowest feature index, then the lowest
    threshold. Returns (feature, threshold, gain), feature == -1 when no
    split satisfies min_leaf on both sides with positive gain.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    best_feat, best_thr, best_gain = -1, 0.0, 0.0
    if n < 2:
        return best_feat, best_thr, best_gain
    for f in range(d):
        order = np.argsort(X[:, f], kind="stable")
        vals = X[order, f]
        cum = np.cumsum(y[order])
        s_total = cum[-1]
        i = np.arange(1, n)
        valid = (
            (vals[:-1] < vals[1:]) & (i >= min_leaf) & ((n - i) >= min_leaf)
        )
        if not valid.any():
            continue
        left = cum[:-1]
        gains = (
            left * left / i
            + (s_total - left) * (s_total - left) / (n - i)
            - s_total * s_total / n
        )
        gains[~valid] = -np.inf
        j = int(np.argmax(gains))
        if gains[j] > best_gain:
            thr = (vals[j] + vals[j + 1]) / 2.0
            if thr == vals[j + 1]:
                thr = vals[j]
            best_feat, best_thr, best_gain = f, float(thr), float(gains[j])
    return best_feat, best_thr, best_gain
