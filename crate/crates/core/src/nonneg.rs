//! Divergent eigenvalue counts for entry perturbations `A + tau e_i e_j^T` of
//! nonnegative irreducible matrices, read off from the directed graph of `A`.
//! Vertex indices are 0-based.

use std::collections::VecDeque;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::detect_kappa;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::perturbation::RankOneSystem;

/// Edges are entries above this fraction of the largest entry.
pub const EDGE_TOL: f64 = 1e-12;

/// Adjacency lists of the graph of `A`, with an edge `i -> j` when
/// `a_ij > EDGE_TOL * max a`.
pub fn graph(a: &CMatrix) -> Result<Vec<Vec<usize>>> {
    let n = a.n();
    let mut max: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = a[(i, j)];
            if x.re < 0.0 || x.im.abs() > linalg::REAL_TOL {
                return Err(Error::NegativeEntry(i, j));
            }
            max = max.max(x.re);
        }
    }
    let cut = EDGE_TOL * max;
    Ok((0..n)
        .map(|i| (0..n).filter(|&j| a[(i, j)].re > cut).collect())
        .collect())
}

fn bfs(adj: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        let d = dist[x].unwrap();
        for &y in &adj[x] {
            if dist[y].is_none() {
                dist[y] = Some(d + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

fn reverse(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut rev = vec![Vec::new(); adj.len()];
    for (i, out) in adj.iter().enumerate() {
        for &j in out {
            rev[j].push(i);
        }
    }
    rev
}

/// Strong connectivity of the graph of `A`.
pub fn is_irreducible(a: &CMatrix) -> Result<bool> {
    let adj = graph(a)?;
    let all = |d: Vec<Option<usize>>| d.iter().all(Option::is_some);
    Ok(all(bfs(&adj, 0)) && all(bfs(&reverse(&adj), 0)))
}

/// Length of the shortest cycle through the edge `i0 -> j0` in the graph of
/// `A + e_{i0} e_{j0}^T`: one plus the distance from `j0` back to `i0`.
pub fn shortest_cycle_through_edge(a: &CMatrix, i0: usize, j0: usize) -> Result<usize> {
    let n = a.n();
    if i0 >= n || j0 >= n {
        return Err(Error::Invalid(format!("edge ({i0}, {j0}) outside a {n}x{n} matrix")));
    }
    let adj = graph(a)?;
    let d = bfs(&adj, j0)[i0].ok_or(Error::NoPath { from: j0, to: i0 })?;
    debug_assert_eq!(Some(d), first_positive_power(a, j0, i0));
    Ok(d + 1)
}

/// First `k` with `(A^k)_{r,c} > 0`, by boolean matrix-vector iteration.
pub fn first_positive_power(a: &CMatrix, r: usize, c: usize) -> Option<usize> {
    let adj = graph(a).ok()?;
    let n = a.n();
    // reach[x]: some walk of length k from r ends at x
    let mut reach = vec![false; n];
    reach[r] = true;
    for k in 0..n {
        if reach[c] {
            return Some(k);
        }
        let mut next = vec![false; n];
        for (x, &on) in reach.iter().enumerate() {
            if on {
                for &y in &adj[x] {
                    next[y] = true;
                }
            }
        }
        reach = next;
    }
    None
}

/// gcd of all cycle lengths of an irreducible graph.
pub fn imprimitivity_index(a: &CMatrix) -> Result<usize> {
    if !is_irreducible(a)? {
        return Err(Error::Reducible);
    }
    let adj = graph(a)?;
    let level = bfs(&adj, 0);
    let mut g = 0usize;
    for (x, out) in adj.iter().enumerate() {
        let lx = level[x].unwrap() as isize;
        for &y in out {
            let ly = level[y].unwrap() as isize;
            g = gcd(g, (lx + 1 - ly).unsigned_abs());
        }
    }
    Ok(g)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCount {
    /// Number of eigenvalues diverging as `tau -> +infinity`.
    pub l: usize,
    pub index: usize,
    pub kappa: Option<usize>,
    /// `a_{i0 j0} > 0`, so the shortest cycle is already a cycle of `A`.
    pub edge_in_graph: bool,
    pub divisible: bool,
    /// `kappa + 1 = l`, and `l` is a multiple of the index whenever the
    /// edge is already present. A new edge can close a cycle of any length.
    pub check: bool,
}

pub fn edge_system(a: &CMatrix, i0: usize, j0: usize) -> Result<RankOneSystem> {
    let n = a.n();
    let e = |i: usize| {
        let mut x = vec![C64::new(0.0, 0.0); n];
        x[i] = C64::new(1.0, 0.0);
        x
    };
    RankOneSystem::new(a.clone(), e(i0), e(j0))
}

pub fn divergence_count(a: &CMatrix, i0: usize, j0: usize) -> Result<DivergenceCount> {
    let index = imprimitivity_index(a)?;
    let l = shortest_cycle_through_edge(a, i0, j0)?;
    let kappa = detect_kappa(&edge_system(a, i0, j0)?)?.kappa;
    let edge_in_graph = graph(a)?[i0].contains(&j0);
    let divisible = l % index == 0;
    Ok(DivergenceCount {
        l,
        index,
        kappa,
        edge_in_graph,
        divisible,
        check: kappa == Some(l - 1) && (divisible || !edge_in_graph),
    })
}

/// Oracle eigenvalues of `A + tau e_{i0} e_{j0}^T` with modulus above
/// `tau^{1/(l+1)}`.
pub fn empirical_count(a: &CMatrix, i0: usize, j0: usize, l: usize, tau: f64) -> Result<usize> {
    let sys = edge_system(a, i0, j0)?;
    let bound = tau.powf(1.0 / (l as f64 + 1.0));
    Ok(linalg::eig_oracle_values(&sys.matrix_at(C64::new(tau, 0.0)))?
        .iter()
        .filter(|z| z.norm() > bound)
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cycle(n: usize) -> CMatrix {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            d[i * n + (i + 1) % n] = 1.0;
        }
        CMatrix::from_real(n, &d).unwrap()
    }

    fn ones(n: usize) -> CMatrix {
        CMatrix::from_real(n, &vec![1.0; n * n]).unwrap()
    }

    #[test]
    fn irreducibility() {
        assert!(is_irreducible(&ones(2)).unwrap());
        assert!(!is_irreducible(&CMatrix::from_real(2, &[1.0, 1.0, 0.0, 1.0]).unwrap()).unwrap());
        assert!(is_irreducible(&cycle(4)).unwrap());
        assert!(matches!(
            is_irreducible(&CMatrix::from_real(2, &[1.0, -1.0, 1.0, 1.0]).unwrap()),
            Err(Error::NegativeEntry(0, 1))
        ));
        // entries at roundoff level are not edges
        let tiny = CMatrix::from_real(2, &[1.0, 1e-14, 0.0, 1.0]).unwrap();
        assert_eq!(graph(&tiny).unwrap()[0], vec![0]);
    }

    #[test]
    fn shortest_cycles() {
        assert_eq!(shortest_cycle_through_edge(&ones(2), 0, 1).unwrap(), 2);
        assert_eq!(shortest_cycle_through_edge(&cycle(4), 2, 2).unwrap(), 1);
        assert_eq!(shortest_cycle_through_edge(&cycle(4), 0, 1).unwrap(), 4);
        // edge 0 -> 2 skips ahead: path 2 -> 3 -> 0
        assert_eq!(shortest_cycle_through_edge(&cycle(4), 0, 2).unwrap(), 3);
        let red = CMatrix::from_real(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            shortest_cycle_through_edge(&red, 0, 1),
            Err(Error::NoPath { from: 1, to: 0 })
        ));
    }

    #[test]
    fn divergence_examples() {
        let d = divergence_count(&ones(2), 0, 1).unwrap();
        assert_eq!((d.l, d.index, d.check), (2, 1, true));
        assert_eq!(empirical_count(&ones(2), 0, 1, 2, 1e8).unwrap(), 2);

        let d = divergence_count(&cycle(4), 0, 1).unwrap();
        assert_eq!((d.l, d.index, d.check), (4, 4, true));

        let pos = CMatrix::from_real(3, &[0.5, 2.0, 1.0, 0.3, 0.7, 1.1, 0.9, 0.2, 1.4]).unwrap();
        for (i, j) in [(0, 0), (0, 1), (2, 1), (1, 1)] {
            let d = divergence_count(&pos, i, j).unwrap();
            assert_eq!(d.l, if i == j { 1 } else { 2 });
            assert!(d.check);
        }
        let red = CMatrix::from_real(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(divergence_count(&red, 0, 1), Err(Error::Reducible)));
        // a self-loop added to a 4-cycle gives one diverging eigenvalue
        let d = divergence_count(&cycle(4), 2, 2).unwrap();
        assert_eq!((d.l, d.index, d.edge_in_graph, d.divisible, d.check), (1, 4, false, false, true));
        assert_eq!(empirical_count(&cycle(4), 2, 2, 1, 1e8).unwrap(), 1);
    }

    fn random_irreducible(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        loop {
            let p = rng.random_range(0.15..0.6);
            let mut d = vec![0.0; n * n];
            // a random Hamiltonian cycle keeps the graph strongly connected
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            for k in 0..n {
                d[perm[k] * n + perm[(k + 1) % n]] = rng.random_range(1.0..2.0);
            }
            for x in d.iter_mut() {
                if *x == 0.0 && rng.random_bool(p) {
                    *x = rng.random_range(1.0..2.0);
                }
            }
            let a = CMatrix::from_real(n, &d).unwrap();
            if is_irreducible(&a).unwrap() {
                return a;
            }
        }
    }

    #[test]
    fn random_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let n = rng.random_range(2..=8);
            let a = random_irreducible(&mut rng, n);
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            let d = divergence_count(&a, i, j).unwrap();
            assert!(d.check, "{d:?}");
            if d.edge_in_graph {
                assert!(d.divisible, "{d:?}");
            }
            assert_eq!(first_positive_power(&a, j, i), Some(d.l - 1));
            assert_eq!(empirical_count(&a, i, j, d.l, 1e8).unwrap(), d.l);
        }
    }

    #[test]
    fn existing_edges_respect_the_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 0..30 {
            let n = rng.random_range(2..=8);
            // plain cycles have index n
            let a = if k % 2 == 0 { cycle(n) } else { random_irreducible(&mut rng, n) };
            let g = graph(&a).unwrap();
            let i = rng.random_range(0..n);
            let j = g[i][rng.random_range(0..g[i].len())];
            let d = divergence_count(&a, i, j).unwrap();
            assert!(d.edge_in_graph && d.divisible && d.check, "{d:?}");
        }
    }
}
