use super::{CandidateSet, ViewEvaluator};
use crate::geom::Vec3;
use crate::material::MaterialState;
use crate::projection::Viewpoint;
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub n_pop: usize,
    pub n_max: usize,
    pub n_converge: usize,
    pub p_uni: f64,
    pub p_geo: f64,
    pub p_nei: f64,
    /// Probability that uniform crossover copies the father.
    pub p_father: f64,
    pub p_glo: f64,
    pub p_loc: f64,
    pub t_slerp: f64,
    pub dedup_retries: usize,
    /// Stop once this fraction of the candidates has been evaluated.
    pub max_eval_fraction: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            n_pop: 30,
            n_max: 15,
            n_converge: 5,
            p_uni: 0.30,
            p_geo: 0.40,
            p_nei: 0.30,
            p_father: 0.5,
            p_glo: 0.05,
            p_loc: 0.10,
            t_slerp: 0.5,
            dedup_retries: 50,
            max_eval_fraction: 1.0,
            seed: 0,
        }
    }
}

impl GaConfig {
    /// Settings for small candidate sets (a few hundred views): a smaller
    /// population run for more generations, capped at 40% of the candidates.
    pub fn desk() -> Self {
        Self {
            n_pop: 14,
            n_max: 40,
            n_converge: 8,
            max_eval_fraction: 0.4,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            self.p_uni,
            self.p_geo,
            self.p_nei,
            self.p_father,
            self.p_glo,
            self.p_loc,
            self.t_slerp,
        ];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument("GA probabilities must lie in [0, 1]".into()));
        }
        if ((self.p_uni + self.p_geo + self.p_nei) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("crossover probabilities must sum to 1".into()));
        }
        if self.p_glo + self.p_loc > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument("mutation probabilities exceed 1".into()));
        }
        if !(self.max_eval_fraction > 0.0 && self.max_eval_fraction <= 1.0) {
            return Err(Error::InvalidArgument("evaluation fraction must lie in (0, 1]".into()));
        }
        if self.n_pop < 2 || self.n_max < 1 || self.n_converge < 1 {
            return Err(Error::InvalidArgument("population and iteration counts too small".into()));
        }
        Ok(())
    }

    /// Most distinct candidates one run may evaluate out of `n`.
    pub fn eval_budget(&self, n: usize) -> usize {
        ((self.max_eval_fraction * n as f64).floor() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Individual {
    pub index: usize,
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(index: usize) -> Self {
        Self {
            index,
            fitness: None,
        }
    }

    fn score(&self) -> f64 {
        self.fitness.expect("fitness evaluated")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub individuals: Vec<Individual>,
    pub generation: usize,
}

impl Population {
    pub fn best(&self) -> Option<&Individual> {
        self.individuals
            .iter()
            .filter(|i| i.fitness.is_some())
            .max_by(|a, b| a.score().total_cmp(&b.score()).then(b.index.cmp(&a.index)))
    }

    fn index_set(&self) -> BTreeSet<usize> {
        self.individuals.iter().map(|i| i.index).collect()
    }
}

/// Greedy farthest-point sampling by angle from a random first pick.
pub fn farthest_point_init(candidates: &CandidateSet, n_pop: usize, rng: &mut impl Rng) -> Result<Population> {
    let n = candidates.len();
    if n_pop > n {
        return Err(Error::InvalidArgument(format!(
            "population {n_pop} exceeds {n} candidates"
        )));
    }
    if n_pop == 0 {
        return Err(Error::InvalidArgument("empty population".into()));
    }
    let first = rng.gen_range(0..n);
    let mut chosen = vec![first];
    // Largest dot product to the chosen set, i.e. cosine of the min angle.
    let mut closest: Vec<f64> = (0..n)
        .map(|i| candidates.direction(i).dot(candidates.direction(first)))
        .collect();
    while chosen.len() < n_pop {
        let next = (0..n)
            .filter(|i| !chosen.contains(i))
            .min_by(|&a, &b| closest[a].total_cmp(&closest[b]))
            .expect("unchosen candidate exists");
        chosen.push(next);
        let d = *candidates.direction(next);
        for (i, c) in closest.iter_mut().enumerate() {
            *c = c.max(candidates.direction(i).dot(&d));
        }
    }
    Ok(Population {
        individuals: chosen.into_iter().map(Individual::new).collect(),
        generation: 0,
    })
}

fn roulette_draw(weights: &[f64], total: f64, rng: &mut impl Rng) -> usize {
    if total <= 0.0 {
        return rng.gen_range(0..weights.len());
    }
    let mut x = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// Fitness-proportional parent pairs (population positions). A pair is
/// redrawn while it repeats the same individual or an earlier pair, at most
/// `retries` times.
pub fn roulette_select_parents(pop: &Population, retries: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let weights: Vec<f64> = pop.individuals.iter().map(|i| i.score().max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    let pairs = (pop.individuals.len() / 2).max(1);
    let mut out: Vec<(usize, usize)> = Vec::with_capacity(pairs);
    let same_pair = |a: (usize, usize), b: (usize, usize), pop: &Population| {
        let key = |p: (usize, usize)| {
            let (x, y) = (pop.individuals[p.0].index, pop.individuals[p.1].index);
            (x.min(y), x.max(y))
        };
        key(a) == key(b)
    };
    for _ in 0..pairs {
        let mut pair = (0, 0);
        for attempt in 0..=retries {
            pair = (roulette_draw(&weights, total, rng), roulette_draw(&weights, total, rng));
            let degenerate = pop.individuals[pair.0].index == pop.individuals[pair.1].index;
            let repeated = out.iter().any(|&p| same_pair(p, pair, pop));
            if !(degenerate || repeated) || attempt == retries {
                break;
            }
        }
        out.push(pair);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossover {
    Uniform,
    Midpoint,
    Neighborhood,
}

fn slerp(a: &Vec3, b: &Vec3, t: f64) -> Option<Vec3> {
    let omega = super::angular_distance(a, b);
    if omega < 1e-12 {
        return Some(*a);
    }
    let s = omega.sin();
    if s < 1e-9 {
        return None;
    }
    Some((a * ((1.0 - t) * omega).sin() + b * (t * omega).sin()) / s)
}

fn neighborhood_child(a: usize, b: usize, candidates: &CandidateSet, rng: &mut impl Rng) -> usize {
    let mut pool: Vec<usize> = candidates
        .neighbors(a)
        .iter()
        .chain(candidates.neighbors(b))
        .map(|&i| i as usize)
        .collect();
    pool.sort_unstable();
    pool.dedup();
    pool.choose(rng).copied().unwrap_or(a)
}

/// One child from two parents (candidate indices); exactly one strategy is
/// drawn per child. Returns the child index and the strategy used.
pub fn crossover(
    father: usize,
    mother: usize,
    candidates: &CandidateSet,
    cfg: &GaConfig,
    rng: &mut impl Rng,
) -> (usize, Crossover) {
    let x: f64 = rng.gen();
    if x < cfg.p_uni {
        let child = if rng.gen::<f64>() < cfg.p_father { father } else { mother };
        (child, Crossover::Uniform)
    } else if x < cfg.p_uni + cfg.p_geo {
        let da = candidates.direction(father);
        let db = candidates.direction(mother);
        match slerp(da, db, cfg.t_slerp) {
            Some(d) => (candidates.nearest(&d.normalize()), Crossover::Midpoint),
            None => (neighborhood_child(father, mother, candidates, rng), Crossover::Neighborhood),
        }
    } else {
        (neighborhood_child(father, mother, candidates, rng), Crossover::Neighborhood)
    }
}

/// Global reset with probability `p_glo`, otherwise a neighbor with
/// probability `p_loc`, otherwise unchanged.
pub fn mutate(child: usize, candidates: &CandidateSet, cfg: &GaConfig, rng: &mut impl Rng) -> usize {
    let x: f64 = rng.gen();
    if x < cfg.p_glo {
        rng.gen_range(0..candidates.len())
    } else if x < cfg.p_glo + cfg.p_loc {
        candidates
            .neighbors(child)
            .choose(rng)
            .map_or(child, |&i| i as usize)
    } else {
        child
    }
}

/// Top `n_pop` distinct individuals of `old` and `children` by fitness; when
/// fewer exist, the best are repeated to keep the size constant.
pub fn elitist_select(old: &Population, children: &[Individual], n_pop: usize) -> Population {
    let mut seen = BTreeSet::new();
    let mut pool: Vec<Individual> = old
        .individuals
        .iter()
        .chain(children)
        .filter(|i| seen.insert(i.index))
        .copied()
        .collect();
    // stable: earlier (older) individuals win ties
    pool.sort_by(|a, b| b.score().total_cmp(&a.score()));
    let distinct = pool.len().min(n_pop);
    pool.truncate(distinct);
    let mut k = 0;
    while pool.len() < n_pop {
        pool.push(pool[k % distinct]);
        k += 1;
    }
    Population {
        individuals: pool,
        generation: old.generation + 1,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub index: usize,
    pub viewpoint: Viewpoint,
    pub fitness: f64,
    /// Populations evaluated, including the initial one.
    pub generations: usize,
    /// Distinct candidates whose fitness was computed.
    pub evaluations: usize,
    /// Best fitness after each generation.
    pub best_history: Vec<f64>,
}

/// Genetic search with a caller-supplied fitness over candidate indices.
/// Each candidate is evaluated at most once, and no new candidate is
/// evaluated once the evaluation budget is spent.
pub fn run_ga_with(
    candidates: &CandidateSet,
    cfg: &GaConfig,
    mut fitness: impl FnMut(usize) -> Result<f64>,
) -> Result<GaOutcome> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cache: HashMap<usize, f64> = HashMap::new();
    let mut eval = |ind: &mut Individual, cache: &mut HashMap<usize, f64>| -> Result<()> {
        let f = match cache.get(&ind.index) {
            Some(&f) => f,
            None => {
                let f = fitness(ind.index)?;
                cache.insert(ind.index, f);
                f
            }
        };
        ind.fitness = Some(f);
        Ok(())
    };

    let initial = cfg.n_pop.min(candidates.len());
    let budget = cfg.eval_budget(candidates.len()).max(initial);
    let mut pop = farthest_point_init(candidates, initial, &mut rng)?;
    for ind in &mut pop.individuals {
        eval(ind, &mut cache)?;
    }
    let mut pop = elitist_select(&pop, &[], cfg.n_pop);
    pop.generation = 0;
    let mut history = vec![pop.best().expect("non-empty").score()];
    let exhaustive = initial == candidates.len();

    let mut unchanged = 0;
    while !exhaustive && pop.generation < cfg.n_max && unchanged < cfg.n_converge && cache.len() < budget {
        let pairs = roulette_select_parents(&pop, cfg.dedup_retries, &mut rng);
        let mut children = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let (child, _) = crossover(
                pop.individuals[a].index,
                pop.individuals[b].index,
                candidates,
                cfg,
                &mut rng,
            );
            let mut child = Individual::new(mutate(child, candidates, cfg, &mut rng));
            if cache.len() >= budget && !cache.contains_key(&child.index) {
                continue;
            }
            eval(&mut child, &mut cache)?;
            children.push(child);
        }
        let next = elitist_select(&pop, &children, cfg.n_pop);
        unchanged = if next.index_set() == pop.index_set() { unchanged + 1 } else { 0 };
        pop = next;
        let best = pop.best().expect("non-empty").score();
        debug_assert!(best >= *history.last().unwrap());
        history.push(best);
    }

    let best = *pop.best().expect("non-empty");
    Ok(GaOutcome {
        index: best.index,
        viewpoint: candidates.viewpoint(best.index),
        fitness: best.score(),
        generations: history.len(),
        evaluations: cache.len(),
        best_history: history,
    })
}

/// Genetic view search scored by area mismatch between `material` and the
/// evaluator's target.
pub fn run_ga(
    material: &MaterialState,
    evaluator: &mut ViewEvaluator,
    candidates: &CandidateSet,
    cfg: &GaConfig,
) -> Result<GaOutcome> {
    run_ga_with(candidates, cfg, |i| evaluator.fitness(material, &candidates.viewpoint(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::viewpoint::fibonacci_sample;

    fn scored(pairs: &[(usize, f64)]) -> Population {
        Population {
            individuals: pairs
                .iter()
                .map(|&(index, f)| Individual {
                    index,
                    fitness: Some(f),
                })
                .collect(),
            generation: 0,
        }
    }

    #[test]
    fn fps_extremes() {
        let c = fibonacci_sample(200, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let all = farthest_point_init(&c, 200, &mut rng).unwrap();
        assert_eq!(all.index_set().len(), 200);
        let two = farthest_point_init(&c, 2, &mut rng).unwrap();
        let (a, b) = (two.individuals[0].index, two.individuals[1].index);
        let far = (0..200).map(|j| c.angle(a, j)).fold(0.0, f64::max);
        assert_eq!(c.angle(a, b), far);
        assert!(farthest_point_init(&c, 201, &mut rng).is_err());
    }

    #[test]
    fn roulette_proportions() {
        let pop = scored(&[(0, 1.0), (1, 3.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = [1.0, 3.0];
        let hits = (0..100_000).filter(|_| roulette_draw(&w, 4.0, &mut rng) == 1).count();
        assert!((hits as f64 / 1e5 - 0.75).abs() < 0.01);
        let w10 = [10.0, 30.0];
        let mut r1 = ChaCha8Rng::seed_from_u64(3);
        let mut r2 = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(roulette_draw(&w, 4.0, &mut r1), roulette_draw(&w10, 40.0, &mut r2));
        }
        let pairs = roulette_select_parents(&pop, 50, &mut rng);
        assert_eq!(pairs.len(), 1);
        assert_ne!(pairs[0].0, pairs[0].1);
    }

    #[test]
    fn roulette_degenerate_population_terminates() {
        let pop = scored(&[(4, 1.0), (4, 1.0), (4, 1.0), (4, 1.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(roulette_select_parents(&pop, 50, &mut rng).len(), 2);
        let zero = scored(&[(1, 0.0), (2, 0.0), (3, 0.0), (5, 0.0)]);
        let pairs = roulette_select_parents(&zero, 50, &mut rng);
        assert!(pairs.iter().all(|p| p.0 != p.1));
    }

    #[test]
    fn slerp_midpoint() {
        let m = slerp(&Vec3::x(), &Vec3::y(), 0.5).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m - Vec3::new(h, h, 0.0)).norm() < 1e-15);
        assert!(slerp(&Vec3::x(), &-Vec3::x(), 0.5).is_none());
    }

    #[test]
    fn crossover_strategies() {
        let c = fibonacci_sample(500, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let only = |u, g, n| GaConfig {
            p_uni: u,
            p_geo: g,
            p_nei: n,
            p_father: 1.0,
            ..GaConfig::default()
        };
        for _ in 0..200 {
            let (a, b) = (rng.gen_range(0..500), rng.gen_range(0..500));
            assert_eq!(crossover(a, b, &c, &only(1.0, 0.0, 0.0), &mut rng), (a, Crossover::Uniform));
            let (child, kind) = crossover(a, b, &c, &only(0.0, 0.0, 1.0), &mut rng);
            assert_eq!(kind, Crossover::Neighborhood);
            assert!(c.neighbors(a).contains(&(child as u32)) || c.neighbors(b).contains(&(child as u32)));
            let (child, kind) = crossover(a, b, &c, &only(0.0, 1.0, 0.0), &mut rng);
            if kind == Crossover::Midpoint {
                let target = slerp(c.direction(a), c.direction(b), 0.5).unwrap();
                let spacing = c.angle(child, c.neighbors(child)[0] as usize);
                assert!(super::super::angular_distance(c.direction(child), &target) <= spacing);
            }
        }
    }

    #[test]
    fn mutation_rules() {
        let c = fibonacci_sample(200, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let none = GaConfig {
            p_glo: 0.0,
            p_loc: 0.0,
            ..GaConfig::default()
        };
        assert!((0..200).all(|i| mutate(i, &c, &none, &mut rng) == i));
        let local = GaConfig {
            p_glo: 0.0,
            p_loc: 1.0,
            ..GaConfig::default()
        };
        for i in 0..200 {
            let j = mutate(i, &c, &local, &mut rng);
            let max_nb = c.neighbors(i).iter().map(|&k| c.angle(i, k as usize)).fold(0.0, f64::max);
            assert!(c.angle(i, j) <= max_nb);
        }
        let global = GaConfig {
            p_glo: 1.0,
            p_loc: 0.0,
            ..GaConfig::default()
        };
        let mut counts = vec![0usize; 200];
        let draws = 100_000;
        for _ in 0..draws {
            counts[mutate(7, &c, &global, &mut rng)] += 1;
        }
        let e = draws as f64 / 200.0;
        let chi2: f64 = counts.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
        // 199 degrees of freedom, 0.999 quantile ~ 267
        assert!(chi2 < 267.0, "chi2 = {chi2}");
    }

    #[test]
    fn elitism() {
        let old = scored(&[(0, 5.0), (1, 4.0), (2, 3.0)]);
        let worse = [Individual { index: 9, fitness: Some(1.0) }];
        assert_eq!(elitist_select(&old, &worse, 3).individuals, old.individuals);
        let better = [Individual { index: 9, fitness: Some(4.5) }, Individual { index: 0, fitness: Some(5.0) }];
        let next = elitist_select(&old, &better, 3);
        assert_eq!(next.individuals.iter().map(|i| i.index).collect::<Vec<_>>(), vec![0, 9, 1]);
        let padded = elitist_select(&scored(&[(3, 1.0)]), &[], 4);
        assert_eq!(padded.individuals.len(), 4);
    }

    #[test]
    fn trivial_and_deterministic_runs() {
        let one = fibonacci_sample(1, 2.0).unwrap();
        let out = run_ga_with(&one, &GaConfig::default(), |_| Ok(3.0)).unwrap();
        assert_eq!((out.index, out.generations, out.evaluations), (0, 1, 1));

        let c = fibonacci_sample(200, 2.0).unwrap();
        let table: Vec<f64> = (0..200).map(|i| (c.direction(i).x * 3.0).sin() + 2.0).collect();
        let cfg = GaConfig {
            seed: 11,
            ..GaConfig::default()
        };
        let a = run_ga_with(&c, &cfg, |i| Ok(table[i])).unwrap();
        let b = run_ga_with(&c, &cfg, |i| Ok(table[i])).unwrap();
        assert_eq!(a, b);
        assert!(a.best_history.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn evaluation_budget() {
        let c = fibonacci_sample(200, 2.0).unwrap();
        let table: Vec<f64> = (0..200).map(|i| (c.direction(i).y * 4.0).cos() + 2.0).collect();
        for seed in 0..20 {
            let cfg = GaConfig { seed, ..GaConfig::desk() };
            let mut calls = 0;
            let out = run_ga_with(&c, &cfg, |i| {
                calls += 1;
                Ok(table[i])
            })
            .unwrap();
            assert!(out.evaluations <= 80 && calls == out.evaluations);
            assert!(out.best_history.windows(2).all(|w| w[1] >= w[0]));
        }
        let bad = GaConfig { max_eval_fraction: 0.0, ..GaConfig::desk() };
        assert!(bad.validate().is_err());
    }
}
