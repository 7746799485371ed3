use nalgebra::DVector;

use super::reward::{max_deviation, ActionBudget};

/// Builds a set of `budget` elements out of `0..n` by repeatedly adding the
/// element with the largest marginal gain `f(S ∪ {j}) − f(S)`. Ties go to the
/// lowest index. Returns the elements in the order they were added.
pub fn greedy_maximize<F>(n: usize, budget: usize, f: F) -> Vec<usize>
where
    F: Fn(&[usize]) -> f64,
{
    let mut chosen = Vec::with_capacity(budget);
    let mut taken = vec![false; n];
    let mut current = f(&chosen);
    for _ in 0..budget.min(n) {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..n).filter(|&j| !taken[j]) {
            chosen.push(j);
            let gain = f(&chosen) - current;
            chosen.pop();
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((j, gain));
            }
        }
        let (j, gain) = best.expect("an unchosen element remains");
        taken[j] = true;
        chosen.push(j);
        current += gain;
    }
    chosen
}

/// Greedy maximization of `S ↦ max_{i∈S} ucb_i`.
pub fn greedy_select(ucb: &DVector<f64>, budget: ActionBudget) -> Vec<usize> {
    greedy_maximize(budget.n(), budget.b(), |s| max_deviation(s, ucb))
}

/// Exhaustive maximum of `f` over all sets of exactly `size` elements of
/// `0..n`, returning the lexicographically first maximizer.
pub fn exhaustive_maximize<F>(n: usize, size: usize, f: F) -> (Vec<usize>, f64)
where
    F: Fn(&[usize]) -> f64,
{
    fn walk<F: Fn(&[usize]) -> f64>(
        start: usize,
        n: usize,
        size: usize,
        cur: &mut Vec<usize>,
        f: &F,
        best: &mut (Vec<usize>, f64),
    ) {
        if cur.len() == size {
            let v = f(cur);
            if v > best.1 {
                *best = (cur.clone(), v);
            }
            return;
        }
        for j in start..n {
            cur.push(j);
            walk(j + 1, n, size, cur, f, best);
            cur.pop();
        }
    }
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    walk(0, n, size.min(n), &mut Vec::new(), &f, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pick_is_argmax() {
        let ucb = DVector::from_vec(vec![0.2, 0.5, 0.5, 0.1]);
        assert_eq!(greedy_select(&ucb, ActionBudget::new(1, 4).unwrap()), vec![1]);
    }

    #[test]
    fn dominated_picks_go_to_lowest_index() {
        let ucb = DVector::from_vec(vec![0.1, 0.3, 0.2]);
        let s = greedy_select(&ucb, ActionBudget::new(2, 3).unwrap());
        assert_eq!(s, vec![1, 0]);
        assert_eq!(max_deviation(&s, &ucb), 0.3);
    }

    #[test]
    fn coverage_function_greedy_beats_bound() {
        // weighted set cover: monotone submodular
        let sets: [&[usize]; 5] = [&[0, 1, 2], &[2, 3], &[3, 4, 5], &[0, 5], &[1, 4]];
        let weight = [3.0, 1.0, 2.0, 2.5, 1.0, 0.5];
        let f = |s: &[usize]| {
            let mut covered = [false; 6];
            for &k in s {
                for &e in sets[k] {
                    covered[e] = true;
                }
            }
            covered.iter().zip(weight).filter(|(c, _)| **c).map(|(_, w)| w).sum::<f64>()
        };
        let g = greedy_maximize(5, 2, f);
        let (_, opt) = exhaustive_maximize(5, 2, f);
        assert!(f(&g) >= (1.0 - (-1f64).exp()) * opt);
    }

    #[test]
    fn exhaustive_finds_best_pair() {
        let v = DVector::from_vec(vec![0.4, 0.1, 0.9]);
        let (s, best) = exhaustive_maximize(3, 2, |s| s.iter().map(|&i| v[i]).sum());
        assert_eq!(s, vec![0, 2]);
        assert!((best - 1.3).abs() < 1e-15);
    }
}
