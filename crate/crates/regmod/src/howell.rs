//! Howell normal form for row spans over Z/p^e.
//!
//! Z/p^e is a chain ring, so every nonzero entry factors as unit · p^v and
//! divisibility is total on valuations. The Howell form is the unique
//! reduced echelon form whose rows additionally satisfy the span-closure
//! property: every span element whose leading coordinate sits in column ≥ c
//! is a combination of the rows with pivot column ≥ c. Uniqueness is what
//! buys O(1) submodule equality, stable hashing and deduplication.

/// Fixed-modulus context: all matrix work happens modulo p^exp.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HowellContext {
    pub p: u64,
    pub exp: u32,
    pub modulus: u64,
}

impl HowellContext {
    pub fn new(p: u64, exp: u32) -> Self {
        let modulus = p.checked_pow(exp).expect("modulus fits in u64");
        HowellContext { p, exp, modulus }
    }

    /// Valuation of a reduced entry; zero entries count as exp.
    pub fn val(&self, a: u64) -> u32 {
        debug_assert!(a < self.modulus);
        if a == 0 {
            return self.exp;
        }
        let mut v = 0;
        let mut rest = a;
        while rest.is_multiple_of(self.p) {
            rest /= self.p;
            v += 1;
        }
        v
    }

    pub fn p_pow(&self, v: u32) -> u64 {
        self.p.checked_pow(v).expect("power fits in u64")
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.modulus - b) % self.modulus
    }

    /// row -= q * other, componentwise.
    fn sub_scaled(&self, row: &mut [u64], other: &[u64], q: u64) {
        for (r, &o) in row.iter_mut().zip(other) {
            *r = self.sub(*r, self.mul(q, o));
        }
    }

    fn scale_row(&self, row: &mut [u64], c: u64) {
        for r in row.iter_mut() {
            *r = self.mul(*r, c);
        }
    }

    /// Inverse of a unit modulo p^exp, by extended Euclid.
    fn inv_unit(&self, u: u64) -> u64 {
        let m = self.modulus as i128;
        let (mut r0, mut r1) = (m, u as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1, "not a unit");
        t0.rem_euclid(m) as u64
    }

    /// Canonical Howell form of the row span. Rows must already be reduced
    /// modulo p^exp and all have `ncols` entries. Zero rows are dropped;
    /// pivots are normalized to exact powers of p, entries above each pivot
    /// are reduced modulo that pivot, and the closure rows p^(exp−v) · row
    /// are folded in so the span property holds.
    pub fn howellize(&self, rows: Vec<Vec<u64>>, ncols: usize) -> Vec<Vec<u64>> {
        let mut work: Vec<Vec<u64>> = rows
            .into_iter()
            .filter(|r| r.iter().any(|&x| x != 0))
            .collect();
        for row in &work {
            debug_assert_eq!(row.len(), ncols);
        }
        let mut pivots: Vec<Vec<u64>> = Vec::new();
        for col in 0..ncols {
            // Invariant: every row in `work` is zero left of `col`.
            let Some(best) = work
                .iter()
                .enumerate()
                .filter(|(_, r)| r[col] != 0)
                .min_by_key(|(_, r)| self.val(r[col]))
                .map(|(i, _)| i)
            else {
                continue;
            };
            let mut piv = work.swap_remove(best);
            let v = self.val(piv[col]);
            let unit = piv[col] / self.p_pow(v);
            self.scale_row(&mut piv, self.inv_unit(unit));
            debug_assert_eq!(piv[col], self.p_pow(v));
            for row in work.iter_mut() {
                if row[col] != 0 {
                    let q = row[col] / self.p_pow(v);
                    self.sub_scaled(row, &piv, q);
                    debug_assert_eq!(row[col], 0);
                }
            }
            if v > 0 {
                let mut closure = piv.clone();
                self.scale_row(&mut closure, self.p_pow(self.exp - v));
                if closure.iter().any(|&x| x != 0) {
                    work.push(closure);
                }
            }
            pivots.push(piv);
        }
        debug_assert!(work.iter().all(|r| r.iter().all(|&x| x == 0)));
        // Reduce entries above each pivot modulo the pivot value.
        for i in 0..pivots.len() {
            let col = pivots[i].iter().position(|&x| x != 0).expect("pivot row");
            let v = self.val(pivots[i][col]);
            let piv = pivots[i].clone();
            for row in pivots[..i].iter_mut() {
                let q = row[col] / self.p_pow(v);
                if q != 0 {
                    self.sub_scaled(row, &piv, q);
                }
                debug_assert!(row[col] < self.p_pow(v));
            }
        }
        pivots
    }

    /// Pivot positions and valuations of a Howell-form matrix.
    fn pivot_info(&self, canon: &[Vec<u64>]) -> Vec<(usize, u32)> {
        canon
            .iter()
            .map(|row| {
                let col = row.iter().position(|&x| x != 0).expect("no zero rows");
                (col, self.val(row[col]))
            })
            .collect()
    }

    /// Number of elements in the row span: the product over pivots of
    /// p^(exp − v).
    pub fn span_order(&self, canon: &[Vec<u64>]) -> u64 {
        self.pivot_info(canon)
            .iter()
            .map(|&(_, v)| self.p_pow(self.exp - v))
            .product()
    }

    /// Reduces `vec` against a Howell form in place; the result is zero
    /// exactly when the vector lies in the span.
    pub fn reduce(&self, canon: &[Vec<u64>], vec: &mut [u64]) {
        for row in canon {
            let col = row.iter().position(|&x| x != 0).expect("no zero rows");
            if vec[col] != 0 {
                let v = self.val(row[col]);
                if self.val(vec[col]) >= v {
                    let q = vec[col] / self.p_pow(v);
                    self.sub_scaled(vec, row, q);
                }
            }
        }
    }

    pub fn is_member(&self, canon: &[Vec<u64>], vec: &[u64]) -> bool {
        let mut rest = vec.to_vec();
        self.reduce(canon, &mut rest);
        rest.iter().all(|&x| x == 0)
    }

    /// All span elements, one per coefficient tuple; the Howell property
    /// makes the coefficient boxes cover the span bijectively.
    pub fn span_elements(&self, canon: &[Vec<u64>], ncols: usize) -> Vec<Vec<u64>> {
        let info = self.pivot_info(canon);
        let mut out = vec![vec![0u64; ncols]];
        for (row, &(_, v)) in canon.iter().zip(&info) {
            let reps = self.p_pow(self.exp - v);
            let mut next = Vec::with_capacity(out.len() * reps as usize);
            for base in &out {
                let mut acc = base.clone();
                for _ in 0..reps {
                    next.push(acc.clone());
                    for (a, &r) in acc.iter_mut().zip(row) {
                        *a = (*a + r) % self.modulus;
                    }
                }
            }
            out = next;
        }
        out
    }
}
