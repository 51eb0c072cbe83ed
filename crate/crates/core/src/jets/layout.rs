use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Monomial bookkeeping for dense truncated Taylor polynomials.
///
/// Monomials are stored in graded lexicographic order, so the layout of a
/// lower order is always a prefix of the layout of a higher one (truncation is
/// a slice).
#[derive(Debug)]
pub struct JetLayout {
    n_vars: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)` with `monomial[i] * monomial[j] == monomial[k]`, total degree <= order.
    products: Vec<(u32, u32, u32)>,
    /// `factorials[i]` is the multi-index factorial of `monomials[i]`.
    factorials: Vec<f64>,
}

impl JetLayout {
    fn build(n_vars: usize, order: usize) -> Self {
        let mut monomials = Vec::new();
        for degree in 0..=order {
            let mut current = vec![0u8; n_vars];
            push_degree(&mut monomials, &mut current, 0, degree);
        }
        let lookup: HashMap<Vec<u8>, usize> = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();

        let degrees: Vec<usize> = monomials.iter().map(|m| m.iter().map(|&e| e as usize).sum()).collect();
        let mut products = Vec::new();
        let mut sum = vec![0u8; n_vars];
        for (i, mi) in monomials.iter().enumerate() {
            for (j, mj) in monomials.iter().enumerate() {
                if degrees[i] + degrees[j] > order {
                    continue;
                }
                for v in 0..n_vars {
                    sum[v] = mi[v] + mj[v];
                }
                let k = lookup[&sum];
                products.push((i as u32, j as u32, k as u32));
            }
        }
        let factorials = monomials
            .iter()
            .map(|m| m.iter().map(|&e| factorial(e as usize)).product())
            .collect();

        Self {
            n_vars,
            order,
            monomials,
            lookup,
            products,
            factorials,
        }
    }

    /// Shared layout for `(n_vars, order)`; layouts are built once per process.
    pub fn get(n_vars: usize, order: usize) -> Arc<JetLayout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet layout cache poisoned");
        guard
            .entry((n_vars, order))
            .or_insert_with(|| Arc::new(JetLayout::build(n_vars, order)))
            .clone()
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Vec<u8>] {
        &self.monomials
    }

    pub fn index_of(&self, idx: &[u8]) -> Option<usize> {
        self.lookup.get(idx).copied()
    }

    pub(crate) fn products(&self) -> &[(u32, u32, u32)] {
        &self.products
    }

    pub(crate) fn factorial(&self, i: usize) -> f64 {
        self.factorials[i]
    }

    /// Index of the unit monomial of variable `var`.
    pub(crate) fn unit_index(&self, var: usize) -> usize {
        // degree-1 monomials follow the constant term in lexicographic order,
        // which places x_0 first.
        1 + var
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, current: &mut [u8], var: usize, remaining: usize) {
    if var + 1 == current.len() {
        current[var] = remaining as u8;
        out.push(current.to_vec());
        current[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e as u8;
        push_degree(out, current, var + 1, remaining - e);
    }
    current[var] = 0;
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Number of multi-indices of total degree <= `order` in `n_vars` variables.
pub fn monomial_count(n_vars: usize, order: usize) -> usize {
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 1..=order as u128 {
        num *= n_vars as u128 + i;
        den *= i;
    }
    (num / den) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_binomial() {
        for n in 1..=6 {
            for order in 0..=4 {
                assert_eq!(JetLayout::get(n, order).len(), monomial_count(n, order));
            }
        }
    }

    #[test]
    fn lower_orders_are_prefixes() {
        let hi = JetLayout::get(4, 4);
        for order in 0..4 {
            let lo = JetLayout::get(4, order);
            assert_eq!(&hi.monomials()[..lo.len()], lo.monomials());
        }
    }

    #[test]
    fn unit_indices_are_first_degree_block() {
        let l = JetLayout::get(5, 3);
        for v in 0..5 {
            let m = &l.monomials()[l.unit_index(v)];
            assert_eq!(m[v], 1);
            assert_eq!(m.iter().map(|&e| e as usize).sum::<usize>(), 1);
        }
    }
}
