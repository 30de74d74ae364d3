//! Kauffman bracket state sum and the Jones polynomial.
//!
//! The bracket is computed as the exact sum over all 2ⁿ smoothings:
//! `⟨D⟩ = Σ_s A^{a(s)−b(s)} (−A²−A⁻²)^{loops(s)−1}`. Loop counting works on
//! the 4n crossing end-points: arcs between consecutive passages pair ends
//! along the link, each smoothing pairs ends at a crossing, and every
//! resulting 2-regular graph component is one state circle.
//!
//! End slots per crossing: 0 = over-in, 1 = over-out, 2 = under-in,
//! 3 = under-out. For a positive crossing the A-smoothing joins
//! over-in↔under-out and over-out↔under-in (the pairing is fixed by the
//! defining identity `⟨positive kink⟩ = −A³⟨unknot⟩`); a negative crossing
//! swaps the roles of A and B.

use super::diagram::KnotDiagram;
use super::laurent::{HalfLaurent, LaurentPoly};
use super::KnotError;

/// State-sum budget: diagrams beyond this many crossings are refused.
pub const MAX_CROSSINGS: usize = 24;

fn smoothing_pairs(sign: i8, a_smoothing: bool) -> [(usize, usize); 2] {
    let join_out = [(0usize, 3usize), (1, 2)]; // over-in↔under-out, over-out↔under-in
    let join_in = [(0usize, 2usize), (1, 3)]; // over-in↔under-in, over-out↔under-out
    if (sign > 0) == a_smoothing {
        join_out
    } else {
        join_in
    }
}

/// Arc pairing of crossing ends induced by the link itself (independent of
/// the smoothing state). Returns `(pairs, free_loops)`.
fn arc_pairs(diagram: &KnotDiagram) -> (Vec<(usize, usize)>, usize) {
    let mut pairs = Vec::new();
    let mut free_loops = 0;
    for comp in &diagram.components {
        if comp.is_empty() {
            free_loops += 1;
            continue;
        }
        let m = comp.len();
        for i in 0..m {
            let cur = comp[i];
            let nxt = comp[(i + 1) % m];
            let out_slot = if cur.over { 1 } else { 3 };
            let in_slot = if nxt.over { 0 } else { 2 };
            pairs.push((4 * cur.crossing + out_slot, 4 * nxt.crossing + in_slot));
        }
    }
    (pairs, free_loops)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            self.parent[r] = self.parent[self.parent[r]];
            r = self.parent[r];
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Exact Kauffman bracket in the variable `A`.
pub fn kauffman_bracket(diagram: &KnotDiagram) -> Result<LaurentPoly, KnotError> {
    let n = diagram.n_crossings();
    if n > MAX_CROSSINGS {
        return Err(KnotError::TooManyCrossings(n));
    }
    diagram
        .validate()
        .expect("bracket requires a well-formed diagram");

    let (arcs, free_loops) = arc_pairs(diagram);
    let delta = LaurentPoly::monomial(2, -1).add(&LaurentPoly::monomial(-2, -1));
    // powers of the loop factor up to the maximum possible loop count
    let mut delta_pow = vec![LaurentPoly::one()];
    for i in 1..=(2 * n + free_loops + 1) {
        delta_pow.push(delta_pow[i - 1].mul(&delta));
    }

    if n == 0 {
        // ⟨k unknots⟩ = δ^{k−1}
        return Ok(delta_pow[free_loops.saturating_sub(1)].clone());
    }

    let mut bracket = LaurentPoly::zero();
    for state in 0u64..(1u64 << n) {
        let mut uf = UnionFind::new(4 * n);
        for &(a, b) in &arcs {
            uf.union(a, b);
        }
        let mut a_count: i64 = 0;
        for c in 0..n {
            let a_smoothing = (state >> c) & 1 == 0;
            if a_smoothing {
                a_count += 1;
            }
            for (s1, s2) in smoothing_pairs(diagram.signs[c], a_smoothing) {
                uf.union(4 * c + s1, 4 * c + s2);
            }
        }
        let mut loops = free_loops;
        for e in 0..4 * n {
            if uf.find(e) == e {
                loops += 1;
            }
        }
        debug_assert!(loops >= 1);
        let b_count = n as i64 - a_count;
        bracket = bracket.add(&delta_pow[loops - 1].shift(a_count - b_count, 1));
    }
    Ok(bracket)
}

/// Jones polynomial `V(t)` via `V = (−A)^{−3w} ⟨D⟩`, `t = A⁻⁴`.
pub fn jones(diagram: &KnotDiagram) -> Result<HalfLaurent, KnotError> {
    let bracket = kauffman_bracket(diagram)?;
    let w = diagram.writhe();
    let sign = if w.rem_euclid(2) == 0 { 1 } else { -1 };
    let normalized = bracket.shift(-3 * w, sign);
    Ok(HalfLaurent::from_a_poly(&normalized))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent loop counter: walk the 2-regular graph alternating arc
    /// and smoothing links, counting cycles explicitly.
    fn oracle_bracket(diagram: &KnotDiagram) -> Vec<(i64, i64)> {
        let n = diagram.n_crossings();
        let (arcs, free_loops) = arc_pairs(diagram);
        let mut arc_link = vec![usize::MAX; 4 * n];
        for &(a, b) in &arcs {
            arc_link[a] = b;
            arc_link[b] = a;
        }

        let mut terms: Vec<(i64, i64)> = Vec::new();
        for state in 0u64..(1u64 << n) {
            let mut smooth_link = vec![usize::MAX; 4 * n];
            let mut a_count = 0i64;
            for c in 0..n {
                let a_sm = (state >> c) & 1 == 0;
                if a_sm {
                    a_count += 1;
                }
                for (s1, s2) in smoothing_pairs(diagram.signs[c], a_sm) {
                    smooth_link[4 * c + s1] = 4 * c + s2;
                    smooth_link[4 * c + s2] = 4 * c + s1;
                }
            }
            let mut visited = vec![false; 4 * n];
            let mut loops = free_loops;
            for start in 0..4 * n {
                if visited[start] {
                    continue;
                }
                loops += 1;
                let mut e = start;
                let mut via_arc = true;
                loop {
                    visited[e] = true;
                    e = if via_arc { arc_link[e] } else { smooth_link[e] };
                    via_arc = !via_arc;
                    if e == start && via_arc {
                        break;
                    }
                }
            }
            // expand A^{a-b}·(−A²−A⁻²)^{loops−1} by binomials
            let b_count = n as i64 - a_count;
            let l = (loops - 1) as i64;
            for k in 0..=l {
                let binom = binomial(l, k);
                let sign = if l % 2 == 0 { 1 } else { -1 };
                let exp = (a_count - b_count) + 2 * k - 2 * (l - k);
                terms.push((exp, sign * binom));
            }
        }
        // merge
        terms.sort_unstable();
        let mut merged: Vec<(i64, i64)> = Vec::new();
        for (e, c) in terms {
            match merged.last_mut() {
                Some((le, lc)) if *le == e => *lc += c,
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0);
        merged
    }

    fn binomial(n: i64, k: i64) -> i64 {
        let mut out = 1i64;
        for i in 0..k {
            out = out * (n - i) / (i + 1);
        }
        out
    }

    fn assert_matches_oracle(d: &KnotDiagram) {
        let fast = kauffman_bracket(d).unwrap();
        let slow = oracle_bracket(d);
        let fast_terms: Vec<(i64, i64)> = fast.terms().collect();
        assert_eq!(fast_terms, slow, "state sum disagrees with enumerator oracle");
    }

    #[test]
    fn unknot_bracket_is_one() {
        assert_eq!(kauffman_bracket(&KnotDiagram::unknot()).unwrap(), LaurentPoly::one());
        assert!(jones(&KnotDiagram::unknot()).unwrap().is_one());
    }

    #[test]
    fn positive_kink_gives_minus_a_cubed() {
        let d = KnotDiagram::unknot().with_curl(0, 1);
        let b = kauffman_bracket(&d).unwrap();
        assert_eq!(b, LaurentPoly::monomial(3, -1));
        // and the negative kink the mirror value
        let d = KnotDiagram::unknot().with_curl(0, -1);
        let b = kauffman_bracket(&d).unwrap();
        assert_eq!(b, LaurentPoly::monomial(-3, -1));
    }

    #[test]
    fn curls_change_bracket_but_not_jones() {
        let base = KnotDiagram::trefoil();
        let v0 = jones(&base).unwrap();
        for sign in [1i8, -1] {
            let curled = base.with_curl(0, sign);
            let b0 = kauffman_bracket(&base).unwrap();
            let b1 = kauffman_bracket(&curled).unwrap();
            assert_eq!(b1, b0.shift(3 * sign as i64, -1), "bracket must scale by (−A³)^±1");
            assert_eq!(jones(&curled).unwrap(), v0, "jones must be invariant under curls");
        }
    }

    #[test]
    fn right_trefoil_jones_is_the_textbook_value() {
        // V(right trefoil) = −t⁴ + t³ + t
        let v = jones(&KnotDiagram::trefoil()).unwrap();
        let mut expected = HalfLaurent::default();
        expected.add_term(8, -1);
        expected.add_term(6, 1);
        expected.add_term(2, 1);
        assert_eq!(v, expected, "got {v}");
        assert_eq!(v.determinant(), 3);
    }

    #[test]
    fn positive_hopf_jones_is_the_textbook_value() {
        // V(positive Hopf) = −t^{1/2} − t^{5/2}
        let v = jones(&KnotDiagram::hopf()).unwrap();
        let mut expected = HalfLaurent::default();
        expected.add_term(1, -1);
        expected.add_term(5, -1);
        assert_eq!(v, expected, "got {v}");
        assert_eq!(v.determinant(), 2);
    }

    #[test]
    fn trefoil_and_hopf_match_the_enumerator_oracle() {
        assert_matches_oracle(&KnotDiagram::trefoil());
        assert_matches_oracle(&KnotDiagram::hopf());
        assert_matches_oracle(&KnotDiagram::torus_2_braid(5));
        assert_matches_oracle(&KnotDiagram::trefoil().mirror());
    }

    #[test]
    fn random_braid_diagrams_match_the_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let p = rng.gen_range(1..=6);
            let mut d = KnotDiagram::torus_2_braid(p);
            if rng.gen_bool(0.5) {
                d = d.mirror();
            }
            for _ in 0..rng.gen_range(0..3) {
                let comp = rng.gen_range(0..d.n_components());
                let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                d = d.with_curl(comp, sign);
            }
            assert_matches_oracle(&d);
        }
    }

    #[test]
    fn mirror_discipline() {
        for d in [KnotDiagram::trefoil(), KnotDiagram::hopf(), KnotDiagram::torus_2_braid(5)] {
            let v = jones(&d).unwrap();
            let vm = jones(&d.mirror()).unwrap();
            assert_eq!(vm, v.mirror(), "jones of mirror must be t ↔ 1/t");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let mut d = KnotDiagram::unknot();
        for _ in 0..(MAX_CROSSINGS + 1) {
            d = d.with_curl(0, 1);
        }
        assert!(matches!(kauffman_bracket(&d), Err(KnotError::TooManyCrossings(_))));
    }

    #[test]
    fn split_union_multiplies_by_delta() {
        // trefoil ⊔ unknot: bracket gains a factor (−A²−A⁻²)
        let t = KnotDiagram::trefoil();
        let mut split = t.clone();
        split.components.push(Vec::new());
        let delta = LaurentPoly::monomial(2, -1).add(&LaurentPoly::monomial(-2, -1));
        assert_eq!(
            kauffman_bracket(&split).unwrap(),
            kauffman_bracket(&t).unwrap().mul(&delta)
        );
    }
}
