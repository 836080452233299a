//! Exact rank of small integer matrices.
//!
//! Rows are reduced incrementally against an echelon basis using integer
//! row combinations (no division), with each reduced row divided by the gcd
//! of its entries so values stay close to the size of the input.

/// Incremental echelon form over the integers.
#[derive(Debug, Clone, Default)]
pub struct IntegerEchelon {
    width: usize,
    // (pivot column, row) with row[pivot] != 0 and row[c] == 0 for earlier pivots' columns
    rows: Vec<(usize, Vec<i128>)>,
}

/// Arithmetic overflowed `i128` while reducing a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankOverflow;

impl IntegerEchelon {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Pivot columns, in insertion order.
    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|(p, _)| *p)
    }

    /// Tries to add `row`; returns `Ok(true)` when it raised the rank.
    pub fn insert(&mut self, row: &[i64]) -> Result<bool, RankOverflow> {
        assert_eq!(row.len(), self.width, "row width mismatch");
        let mut v: Vec<i128> = row.iter().map(|&x| x as i128).collect();
        for (pivot, basis) in &self.rows {
            let coef = v[*pivot];
            if coef == 0 {
                continue;
            }
            let lead = basis[*pivot];
            for (x, b) in v.iter_mut().zip(basis) {
                let scaled = x.checked_mul(lead).ok_or(RankOverflow)?;
                let sub = coef.checked_mul(*b).ok_or(RankOverflow)?;
                *x = scaled.checked_sub(sub).ok_or(RankOverflow)?;
            }
            normalize(&mut v);
        }
        match v.iter().position(|&x| x != 0) {
            Some(pivot) => {
                normalize(&mut v);
                // Keep the echelon fully reduced in the new pivot column so later
                // insertions only need one pass.
                for (_, basis) in self.rows.iter_mut() {
                    let coef = basis[pivot];
                    if coef == 0 {
                        continue;
                    }
                    let lead = v[pivot];
                    for (b, x) in basis.iter_mut().zip(&v) {
                        let scaled = b.checked_mul(lead).ok_or(RankOverflow)?;
                        let sub = coef.checked_mul(*x).ok_or(RankOverflow)?;
                        *b = scaled.checked_sub(sub).ok_or(RankOverflow)?;
                    }
                    normalize(basis);
                }
                self.rows.push((pivot, v));
                Ok(true)
            }
            None => Ok(false),
        }
    }
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn normalize(v: &mut [i128]) {
    let g = v.iter().fold(0, |g, &x| gcd(g, x));
    if g > 1 {
        for x in v.iter_mut() {
            *x /= g;
        }
    }
}

/// Exact rank of a set of integer rows of equal width.
pub fn integer_rank<R: AsRef<[i64]>>(rows: &[R], width: usize) -> Result<usize, RankOverflow> {
    let mut ech = IntegerEchelon::new(width);
    for r in rows {
        ech.insert(r.as_ref())?;
        if ech.rank() == width {
            break;
        }
    }
    Ok(ech.rank())
}
