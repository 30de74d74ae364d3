//! Combinatorial knot/link diagrams.
//!
//! A diagram is a set of crossings with signs plus, per link component, the
//! cyclic sequence of crossing passages (signed Gauss code). This is all the
//! bracket and linking machinery needs; planar coordinates are forgotten as
//! soon as a projection has produced the combinatorics.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passage {
    pub crossing: usize,
    pub over: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnotDiagram {
    /// Crossing signs (`+1` or `-1`), indexed by crossing id.
    pub signs: Vec<i8>,
    /// One cyclic passage sequence per link component. Components without
    /// passages are free loops.
    pub components: Vec<Vec<Passage>>,
}

impl KnotDiagram {
    pub fn n_crossings(&self) -> usize {
        self.signs.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn writhe(&self) -> i64 {
        self.signs.iter().map(|&s| s as i64).sum()
    }

    /// A zero-crossing unknot.
    pub fn unknot() -> Self {
        KnotDiagram { signs: Vec::new(), components: vec![Vec::new()] }
    }

    /// Closure of the 2-strand braid `σ₁^p`: the `(p, 2)` torus link family
    /// (`p = 2` Hopf link, `p = 3` trefoil, ...). Positive `p` builds the
    /// all-positive (right-handed) diagram.
    pub fn torus_2_braid(p: u32) -> Self {
        let n = p as usize;
        let signs = vec![1i8; n];
        // strand positions swap at every crossing; follow each strand
        // through the braid and close up
        let mut strand_passages: [Vec<Passage>; 2] = [Vec::new(), Vec::new()];
        let mut pos: [usize; 2] = [0, 1]; // strand id -> position
        for c in 0..n {
            // at step c, the strand at position 0 goes over
            let over_strand = if pos[0] == 0 { 0 } else { 1 };
            let under_strand = 1 - over_strand;
            strand_passages[over_strand].push(Passage { crossing: c, over: true });
            strand_passages[under_strand].push(Passage { crossing: c, over: false });
            pos.swap(0, 1);
        }
        // closure: if the permutation is the identity (even p) the strands
        // stay separate components; odd p concatenates them
        if n % 2 == 0 {
            KnotDiagram {
                signs,
                components: vec![strand_passages[0].clone(), strand_passages[1].clone()],
            }
        } else {
            let mut joined = strand_passages[0].clone();
            joined.extend_from_slice(&strand_passages[1]);
            KnotDiagram { signs, components: vec![joined] }
        }
    }

    /// Standard 3-crossing right-handed trefoil.
    pub fn trefoil() -> Self {
        KnotDiagram::torus_2_braid(3)
    }

    /// Standard 2-crossing positive Hopf link.
    pub fn hopf() -> Self {
        KnotDiagram::torus_2_braid(2)
    }

    /// Mirror image: every crossing flips over/under, negating its sign.
    pub fn mirror(&self) -> Self {
        KnotDiagram {
            signs: self.signs.iter().map(|&s| -s).collect(),
            components: self
                .components
                .iter()
                .map(|comp| {
                    comp.iter()
                        .map(|p| Passage { crossing: p.crossing, over: !p.over })
                        .collect()
                })
                .collect(),
        }
    }

    /// Adds a single kink (Reidemeister-I curl) of the given sign on one
    /// component: a new crossing passed twice in a row by the same strand.
    pub fn with_curl(&self, component: usize, sign: i8) -> Self {
        let mut out = self.clone();
        let id = out.signs.len();
        out.signs.push(sign);
        out.components[component].push(Passage { crossing: id, over: true });
        out.components[component].push(Passage { crossing: id, over: false });
        out
    }

    /// Checks that every crossing is passed exactly once over and once under.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.n_crossings();
        let mut over_seen = vec![0usize; n];
        let mut under_seen = vec![0usize; n];
        for comp in &self.components {
            for p in comp {
                if p.crossing >= n {
                    return Err(format!("passage references crossing {}", p.crossing));
                }
                if p.over {
                    over_seen[p.crossing] += 1;
                } else {
                    under_seen[p.crossing] += 1;
                }
            }
        }
        for c in 0..n {
            if over_seen[c] != 1 || under_seen[c] != 1 {
                return Err(format!(
                    "crossing {c} passed over {} and under {} times",
                    over_seen[c], under_seen[c]
                ));
            }
            if self.signs[c] != 1 && self.signs[c] != -1 {
                return Err(format!("crossing {c} has sign {}", self.signs[c]));
            }
        }
        Ok(())
    }

    /// Signed Gauss code, one line per component: `O1+ U2- ...` with
    /// 1-based crossing labels.
    pub fn gauss_code(&self) -> String {
        self.components
            .iter()
            .map(|comp| {
                if comp.is_empty() {
                    return "(free loop)".to_string();
                }
                comp.iter()
                    .map(|p| {
                        format!(
                            "{}{}{}",
                            if p.over { "O" } else { "U" },
                            p.crossing + 1,
                            if self.signs[p.crossing] > 0 { "+" } else { "-" }
                        )
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Component indices carried by each crossing: `(over, under)`.
    pub fn crossing_components(&self) -> Vec<(usize, usize)> {
        let mut out = vec![(usize::MAX, usize::MAX); self.n_crossings()];
        for (ci, comp) in self.components.iter().enumerate() {
            for p in comp {
                if p.over {
                    out[p.crossing].0 = ci;
                } else {
                    out[p.crossing].1 = ci;
                }
            }
        }
        out
    }
}
