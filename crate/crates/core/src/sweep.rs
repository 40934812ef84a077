//! The halving sweep behind the fast transforms.
//!
//! The input is `ncols` columns of `rows_in` values each, column-major. The
//! output holds, for every slope `s ∈ 0..ncols` and every height `h` whose
//! digital line can touch the input, the sum of one entry per column along
//! that line. Heights are stored with an offset of `ncols − 1`, so output
//! row `r` corresponds to `h = r − (ncols − 1)` measured in input rows, and
//! there are `rows_in + ncols − 1` output rows.
//!
//! Level `m → 2m` merges neighbouring blocks of `m` columns:
//!
//! ```text
//! out(h, 2s)     = left(h, s) + right(h + s,     s)
//! out(h, 2s + 1) = left(h, s) + right(h + s + 1, s)
//! ```
//!
//! Heights that fall above the stored range belong to lines that miss the
//! input entirely and contribute zero. [`adjoint`] is the exact transpose of
//! [`forward`], level by level in reverse.

pub(crate) fn rows_out(rows_in: usize, ncols: usize) -> usize {
    rows_in + ncols - 1
}

pub(crate) fn forward(input: &[f64], rows_in: usize, ncols: usize) -> Vec<f64> {
    debug_assert!(ncols.is_power_of_two());
    debug_assert_eq!(input.len(), rows_in * ncols);
    let rows = rows_out(rows_in, ncols);
    let mut a = vec![0.0; rows * ncols];
    for j in 0..ncols {
        a[j * rows + ncols - 1..j * rows + ncols - 1 + rows_in]
            .copy_from_slice(&input[j * rows_in..(j + 1) * rows_in]);
    }
    if ncols == 1 {
        return a;
    }
    let mut b = vec![0.0; rows * ncols];
    if forward_block(&mut a, &mut b, rows, ncols, ncols) {
        b
    } else {
        a
    }
}

// Blocks are swept depth first so that small blocks stay in cache, up to
// three levels per pass. Returns whether the block's result sits in `b`.
fn forward_block(a: &mut [f64], b: &mut [f64], rows: usize, width: usize, ncols: usize) -> bool {
    let lo = ncols - width;
    match width {
        1 => false,
        2 => {
            fused::<2>(a, b, rows, 1, lo);
            true
        }
        4 => {
            fused::<4>(a, b, rows, 1, lo);
            true
        }
        _ => {
            let part = width / 8;
            let mut in_b = false;
            for (pa, pb) in a.chunks_mut(part * rows).zip(b.chunks_mut(part * rows)) {
                in_b = forward_block(pa, pb, rows, part, ncols);
            }
            if in_b {
                fused::<8>(b, a, rows, part, lo);
            } else {
                fused::<8>(a, b, rows, part, lo);
            }
            !in_b
        }
    }
}

/// Height offsets of the `2^k` leaves feeding output column `t` of a block
/// merged over `k` levels:
///
/// ```text
/// out(h, 2σ + γ) = L(h, σ) + R(h + σ + γ, σ)
/// ```
///
/// applied recursively, where `L` and `R` see the same column `σ`.
fn leaf_offsets(t: usize, offs: &mut [usize]) {
    if offs.len() == 1 {
        offs[0] = 0;
        return;
    }
    let (sigma, gamma) = (t >> 1, t & 1);
    let (left, right) = offs.split_at_mut(offs.len() / 2);
    leaf_offsets(sigma, left);
    for (r, l) in right.iter_mut().zip(left.iter()) {
        *r = l + sigma + gamma;
    }
}

/// Pairwise sum of the first `K` leaves, grouped as the level-by-level
/// merges group them.
#[inline(always)]
fn tree<const K: usize>(x: [f64; K]) -> f64 {
    match K {
        1 => x[0],
        2 => x[0] + x[1],
        3 => (x[0] + x[1]) + x[2],
        4 => (x[0] + x[1]) + (x[2] + x[3]),
        5 => ((x[0] + x[1]) + (x[2] + x[3])) + x[4],
        6 => ((x[0] + x[1]) + (x[2] + x[3])) + (x[4] + x[5]),
        7 => ((x[0] + x[1]) + (x[2] + x[3])) + ((x[4] + x[5]) + x[6]),
        8 => ((x[0] + x[1]) + (x[2] + x[3])) + ((x[4] + x[5]) + (x[6] + x[7])),
        _ => unreachable!(),
    }
}

#[inline(always)]
fn segment<const K: usize>(out: &mut [f64], leaves: &[&[f64]], offs: &[usize], start: usize) {
    let len = out.len();
    let src: [&[f64]; K] = std::array::from_fn(|q| &leaves[q][start + offs[q]..][..len]);
    for (i, o) in out.iter_mut().enumerate() {
        *o = tree::<K>(std::array::from_fn(|q| src[q][i]));
    }
}

// Merges `R` blocks of width `m` into one of width `R·m` (`R` = 2, 4 or 8)
// in one pass. A leaf whose row lies past the block contributes nothing;
// offsets grow from left to right, so the live leaves always form a prefix.
// After merging to width `w`, rows below `ncols − w` are zero whatever the
// input, so they are never touched.
fn fused<const R: usize>(cur: &[f64], next: &mut [f64], rows: usize, m: usize, lo: usize) {
    let mut offs = [0usize; R];
    for t in 0..R * m {
        let s = t / R;
        leaf_offsets(t, &mut offs);
        debug_assert!(offs.windows(2).all(|w| w[0] <= w[1]));
        let leaves: [&[f64]; R] = std::array::from_fn(|q| &cur[(q * m + s) * rows..][..rows]);
        let out = &mut next[t * rows..][..rows];
        // Exactly the first `k` leaves are live on rows `bound(k)..bound(k − 1)`.
        let bound = |j: usize| rows.saturating_sub(offs[j]).max(lo);
        let mut start = lo;
        for k in (1..=R).rev() {
            let end = bound(k - 1);
            let seg = &mut out[start..end];
            match k {
                1 => segment::<1>(seg, &leaves, &offs, start),
                2 => segment::<2>(seg, &leaves, &offs, start),
                3 => segment::<3>(seg, &leaves, &offs, start),
                4 => segment::<4>(seg, &leaves, &offs, start),
                5 => segment::<5>(seg, &leaves, &offs, start),
                6 => segment::<6>(seg, &leaves, &offs, start),
                7 => segment::<7>(seg, &leaves, &offs, start),
                _ => segment::<8>(seg, &leaves, &offs, start),
            }
            start = end;
        }
        debug_assert_eq!(start, rows);
    }
}

pub(crate) fn adjoint(output: &[f64], rows_in: usize, ncols: usize) -> Vec<f64> {
    debug_assert!(ncols.is_power_of_two());
    let rows = rows_out(rows_in, ncols);
    debug_assert_eq!(output.len(), rows * ncols);
    let (mut a, mut b) = (vec![0.0; rows * ncols], vec![0.0; rows * ncols]);
    if ncols.trailing_zeros() % 2 == 1 {
        b.copy_from_slice(output);
    } else {
        a.copy_from_slice(output);
    }
    adjoint_block(&mut a, &mut b, rows, ncols, ncols);
    let mut input = vec![0.0; rows_in * ncols];
    for j in 0..ncols {
        input[j * rows_in..(j + 1) * rows_in]
            .copy_from_slice(&a[j * rows + ncols - 1..j * rows + ncols - 1 + rows_in]);
    }
    input
}

fn adjoint_block(a: &mut [f64], b: &mut [f64], rows: usize, width: usize, ncols: usize) {
    if width == 1 {
        return;
    }
    let half = width / 2;
    let lo = ncols - half;
    if width.trailing_zeros() % 2 == 1 {
        split(b, a, rows, half, lo);
    } else {
        split(a, b, rows, half, lo);
    }
    let (al, ar) = a.split_at_mut(half * rows);
    let (bl, br) = b.split_at_mut(half * rows);
    adjoint_block(al, bl, rows, half, ncols);
    adjoint_block(ar, br, rows, half, ncols);
}

// Transpose of `merge`. Rows below `lo` of the halves only ever meet rows
// the forward sweep keeps at zero, so they are left stale.
fn split(cur: &[f64], next: &mut [f64], rows: usize, m: usize, lo: usize) {
    for s in 0..m {
        let (even, odd) = cur[2 * s * rows..(2 * s + 2) * rows].split_at(rows);
        {
            let left = &mut next[s * rows..][..rows];
            for ((l, &e), &o) in left[lo..].iter_mut().zip(&even[lo..]).zip(&odd[lo..]) {
                *l = e + o;
            }
        }
        let right = &mut next[(m + s) * rows..][..rows];
        if lo < s {
            right[lo..s].fill(0.0);
        }
        if lo <= s {
            right[s] = even[0];
        }
        let from = lo.max(s + 1);
        for (k, r) in right.iter_mut().enumerate().skip(from) {
            *r = even[k - s] + odd[k - s - 1];
        }
    }
}
