//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{enumerate, paired_auc, EagerAccepter, Instance};
use negotiation_game::agents::{
    AbstractState, Agent, EpisodeContext, Phase, QLearningAgent, QLearningConfig, RandomAgent, RuleBasedAgent,
    RuleBasedConfig,
};
use negotiation_game::game::{solve_exhaustive, DialogueAct, Mode, OutcomeKind, Player};
use negotiation_game::harness::{
    build_seeded_scenario, run_benchmark, run_episode, AgentSpec, AgentsSpec, CostSpec, EpisodeCounts,
    EpisodeRecord, EpisodeSettings, FirstSpeaker, PlayerSpec, Preset, RunOptions, ScenarioConfig, SpaceSpec,
};
use negotiation_game::perception::{perceive, ChannelConfig, ConfidenceModel, Direction, NOISE_SPREAD};

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

/// One fuzzed episode: a random instance, random or rule-based agents and a
/// noisy system ear. The same episode is replayed with `alpha` overridden.
struct FuzzCase {
    inst: Instance,
    error_rate: f64,
    t_max: u32,
    seed: u64,
    rule_based: [bool; 2],
}

fn fuzz_corpus(cases: usize) -> Vec<FuzzCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a5a);
    let shapes: [&[usize]; 5] = [&[2], &[3], &[2, 2], &[3, 2, 2], &[4, 3]];
    (0..cases)
        .map(|i| {
            let sizes = shapes[rng.random_range(0..shapes.len())];
            let mode = if sizes.len() == 1 && rng.random() { Mode::Simple } else { Mode::Compounded };
            FuzzCase {
                inst: Instance::random(&mut rng, sizes, mode, 0.25),
                error_rate: [0.0, 0.2, 0.5][rng.random_range(0..3)],
                t_max: rng.random_range(1..=16),
                seed: i as u64,
                rule_based: [rng.random_bool(0.3), rng.random_bool(0.3)],
            }
        })
        .collect()
}

fn play(case: &FuzzCase, alpha: [f64; 2]) -> EpisodeRecord {
    let inst = Instance { alpha, ..case.inst.clone() };
    let mut game = inst.game(case.t_max);
    if case.error_rate > 0.0 {
        let mut players = game.players().to_vec();
        players[0].error_rate = case.error_rate;
        game = negotiation_game::game::Game::new(game.space().clone(), players, game.mode(), case.t_max).unwrap();
    }
    let build = |rb: bool| -> Box<dyn Agent> {
        if rb {
            Box::new(RuleBasedAgent::new(RuleBasedConfig::default()))
        } else {
            Box::new(RandomAgent::new())
        }
    };
    let (mut a, mut b) = (build(case.rule_based[0]), build(case.rule_based[1]));
    run_episode(&game, [a.as_mut(), b.as_mut()], case.seed, &EpisodeContext::eval(), &EpisodeSettings::default())
        .unwrap()
}

fn outcome_mix(records: &[EpisodeRecord]) -> Result<String, String> {
    let counts: Vec<(OutcomeKind, usize)> = OutcomeKind::ALL
        .iter()
        .map(|&k| (k, records.iter().filter(|r| r.outcome == k).count()))
        .collect();
    for (k, c) in &counts {
        ensure(*c > 0, || format!("corpus has no {} outcome", k.name()))?;
    }
    Ok(counts.iter().map(|(k, c)| format!("{}={c}", k.name())).collect::<Vec<_>>().join(" "))
}

fn criterion_1(corpus: &[FuzzCase]) -> Check {
    let start = Instant::now();
    let records: Vec<EpisodeRecord> = corpus.iter().map(|c| play(c, [-1.0, -1.0])).collect();
    let mut worst: f64 = 0.0;
    for r in &records {
        worst = worst.max((r.rewards[0] + r.rewards[1]).abs());
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    ensure(worst <= 1e-12, || format!("max |R1 + R2| = {worst:e}"))?;
    let mix = outcome_mix(&records)?;
    Ok(format!("{} outcomes, max |R1 + R2| = {worst:e}, {mix}, {:.2?}", records.len(), start.elapsed()))
}

fn criterion_2(corpus: &[FuzzCase]) -> Check {
    let records: Vec<EpisodeRecord> = corpus.iter().map(|c| play(c, [1.0, 1.0])).collect();
    let unequal = records.iter().filter(|r| r.rewards[0] != r.rewards[1]).count();
    ensure(unequal == 0, || format!("{unequal} outcomes with R1 != R2"))?;
    let mix = outcome_mix(&records)?;
    Ok(format!("{} outcomes, all R1 == R2, {mix}", records.len()))
}

fn reduction_config(mode: Mode, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        name: "reduction".into(),
        seed,
        mode,
        preset: Some(Preset::Appointment),
        space: SpaceSpec::Sizes { domain_sizes: vec![5] },
        system: PlayerSpec { error_rate: 0.3, ..PlayerSpec::default() },
        agents: AgentsSpec {
            system: AgentSpec::RuleBased(RuleBasedConfig::default()),
            user: AgentSpec::RuleBased(RuleBasedConfig { kappa: 1.2, ..RuleBasedConfig::default() }),
        },
        episodes: EpisodeCounts { train: 0, eval: 2000 },
        ..ScenarioConfig::builtin()
    }
}

fn as_compounded(act: &DialogueAct) -> DialogueAct {
    match act {
        DialogueAct::RefProp(opt) => DialogueAct::propose_option(opt),
        other => other.clone(),
    }
}

fn criterion_3() -> Check {
    let options = RunOptions { out_dir: None, keep_records: true };
    let mut turns = 0;
    let mut episodes = 0;
    let mut repeats = 0;
    for seed in [3, 17, 2024] {
        let simple = run_benchmark(&reduction_config(Mode::Simple, seed), &options).map_err(|e| e.to_string())?;
        let compounded =
            run_benchmark(&reduction_config(Mode::Compounded, seed), &options).map_err(|e| e.to_string())?;
        ensure(simple.game.players() == compounded.game.players(), || "sampled costs differ".into())?;
        for (s, c) in simple.records.iter().zip(&compounded.records) {
            ensure(s.transcript.len() == c.transcript.len(), || format!("episode {} lengths differ", s.index))?;
            for (ts, tc) in s.transcript.iter().zip(&c.transcript) {
                let same = ts.speaker == tc.speaker
                    && as_compounded(&ts.spoken) == tc.spoken
                    && as_compounded(&ts.perceived) == tc.perceived
                    && ts.confidences == tc.confidences;
                ensure(same, || format!("seed {seed} episode {} turn {} differs", s.index, ts.turn))?;
                if tc.spoken == DialogueAct::AskRepeat {
                    repeats += 1;
                }
                turns += 1;
            }
            ensure(s.outcome == c.outcome && s.rewards == c.rewards && s.first == c.first, || {
                format!("seed {seed} episode {} outcome differs", s.index)
            })?;
            episodes += 1;
        }
    }
    ensure(repeats > 0, || "no repeat requests exercised".into())?;
    Ok(format!("{episodes} episodes, {turns} turns identical ({repeats} repeat requests)"))
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let sizes = [3usize, 5, 2, 7];
    let space = negotiation_game::game::FeatureSpace::with_sizes(&sizes).unwrap();
    let mut details = Vec::new();
    for (i, rate) in [0.1, 0.3, 0.5].into_iter().enumerate() {
        let channel = ChannelConfig {
            direction: Direction::UserToSystem,
            error_rate: rate,
            slot_error_rates: None,
            confidence: ConfidenceModel::new(-1.0, 1.0),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(40 + i as u64);
        let (mut slots, mut flipped) = (0u64, 0u64);
        while slots < 1_000_000 {
            let spoken: std::collections::BTreeMap<usize, usize> =
                sizes.iter().enumerate().map(|(k, &d)| (k, rng.random_range(0..d))).collect();
            let heard = perceive(&DialogueAct::PropFeatures(spoken.clone()), &space, &channel, &mut rng);
            let DialogueAct::PropFeatures(heard) = heard.act else { return Err("act type changed".into()) };
            for (k, v) in &spoken {
                slots += 1;
                if heard[k] != *v {
                    flipped += 1;
                }
            }
        }
        let empirical = flipped as f64 / slots as f64;
        ensure((empirical - rate).abs() <= 0.005, || format!("FER {rate}: empirical {empirical}"))?;
        details.push(format!("{rate}->{empirical:.4}"));
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("{} over 1e6 slots each, {:.2?}", details.join(" "), start.elapsed()))
}

fn auc_at(separation: f64, seed: u64) -> f64 {
    let model = ConfidenceModel::new(-separation / 2.0, separation / 2.0).with_spread(NOISE_SPREAD);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 100_000;
    let right: Vec<f64> = (0..n).map(|_| model.sample(true, &mut rng)).collect();
    let wrong: Vec<f64> = (0..n).map(|_| model.sample(false, &mut rng)).collect();
    paired_auc(&right, &wrong)
}

fn criterion_5() -> Check {
    let equal = auc_at(0.0, 50);
    ensure((equal - 0.5).abs() <= 0.02, || format!("AUC at equal centres {equal}"))?;
    let apart = auc_at(4.0, 51);
    ensure(apart > 0.99, || format!("AUC at separation 4 is {apart}"))?;
    let grid = [0.0, 0.1, 0.25, 0.5, 1.0, 4.0];
    let aucs: Vec<f64> = grid.iter().enumerate().map(|(i, &s)| auc_at(s, 60 + i as u64)).collect();
    for w in aucs.windows(2) {
        ensure(w[1] >= w[0], || format!("AUC not monotone over the grid: {aucs:?}"))?;
    }
    Ok(format!(
        "equal {equal:.4}, separation 4 {apart:.4}, grid {}",
        grid.iter().zip(&aucs).map(|(s, a)| format!("{s}:{a:.4}")).collect::<Vec<_>>().join(" ")
    ))
}

fn criterion_6() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ac1e);
    let shapes: [(&[usize], Mode, u32); 6] = [
        (&[2], Mode::Compounded, 6),
        (&[3], Mode::Compounded, 6),
        (&[4], Mode::Compounded, 5),
        (&[2, 2], Mode::Compounded, 5),
        (&[3], Mode::Simple, 6),
        (&[4], Mode::Simple, 6),
    ];
    let mut instances = 0;
    for round in 0..4 {
        for &(sizes, mode, horizon) in &shapes {
            let inst = Instance::random(&mut rng, sizes, mode, if round % 2 == 0 { 0.0 } else { 0.3 });
            let game = inst.game(50);
            for first in Player::BOTH {
                let sol = solve_exhaustive(&game, horizon, first).map_err(|e| e.to_string())?;
                let reference = enumerate(&inst, horizon, first.index());
                ensure(sol.values == reference.values && sol.root_act == reference.root_act, || {
                    format!(
                        "{sizes:?} {mode:?} h{horizon} first {first}: solver {:?} {} vs enumeration {:?} {}",
                        sol.values, sol.root_act, reference.values, reference.root_act
                    )
                })?;
            }
            instances += 1;
        }
    }
    let solver_time = start.elapsed();

    let mut learned = Vec::new();
    for sizes in [vec![2usize], vec![2, 2]] {
        // First seed whose cooperative optimum is an agreement rather than leaving.
        let (game, oracle) = (0..)
            .map(|seed| {
                let config = ScenarioConfig {
                    seed,
                    preset: Some(Preset::Coop),
                    space: SpaceSpec::Sizes { domain_sizes: sizes.clone() },
                    system: PlayerSpec::default(),
                    user: PlayerSpec::default(),
                    ..ScenarioConfig::builtin()
                };
                let game = build_seeded_scenario(&config).unwrap();
                let oracle = solve_exhaustive(&game, 4, Player::System).unwrap();
                (game, oracle)
            })
            .find(|(_, o)| o.values[0] > 0.0)
            .unwrap();
        let mut learner = QLearningAgent::new(QLearningConfig::default());
        let mut user = RuleBasedAgent::new(RuleBasedConfig { kappa: f64::INFINITY, theta: 0.0, ..Default::default() });
        let settings = EpisodeSettings { first_speaker: FirstSpeaker::System, ..Default::default() };
        let total = 50_000;
        for index in 0..total {
            let ctx = EpisodeContext { phase: Phase::Train, index, total };
            run_episode(&game, [&mut learner, &mut user], index, &ctx, &settings).map_err(|e| e.to_string())?;
        }
        let value = learner
            .greedy_value(&AbstractState::opening(sizes.len()))
            .ok_or("opening state never visited")?;
        let gap = (value - oracle.values[0]).abs();
        ensure(gap <= 0.05, || format!("{sizes:?}: greedy value {value} vs oracle {}", oracle.values[0]))?;
        learned.push(format!("{sizes:?} {value:.4} vs {:.4}", oracle.values[0]));
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "{instances} instances x 2 openers match the enumeration ({solver_time:.2?}); Q-learning {}",
        learned.join(", ")
    ))
}

fn criterion_7() -> Check {
    // Options (a, b) sit at index 2a + b.
    let inst = Instance {
        sizes: vec![2, 2],
        mode: Mode::Compounded,
        omega: [1.0, 1.0],
        alpha: [0.5, -0.25],
        option_costs: [vec![0.25, 0.5, 0.125, 0.75], vec![0.5, 0.0625, 0.375, 0.25]],
        feature_costs: [vec![vec![0.0625, 0.125], vec![0.25, 0.03125]], vec![vec![0.0, 0.125], vec![0.0625, 0.0]]],
    };
    let mut players = inst.game(50).players().to_vec();
    players[0].slot_error_rates = Some(vec![1.0, 0.0]);
    let base = inst.game(50);
    let game = negotiation_game::game::Game::new(base.space().clone(), players, Mode::Compounded, 50).unwrap();
    // The user's cheapest option is (0, 1) at 0.0625; the system hears (1, 1),
    // which costs it 0.75 + 0.125 + 0.03125 = 0.90625.
    //   R_system = -0.90625 - 0.5 * 0.0625     = -0.9375
    //   R_user   = -0.0625 + 0.25 * 0.90625    =  0.1640625
    let expected = vec![-0.9375, 0.1640625];
    let settings = EpisodeSettings { first_speaker: FirstSpeaker::User, ..Default::default() };
    let episodes = 1000;
    for seed in 0..episodes {
        let (mut system, mut user) = (EagerAccepter, RuleBasedAgent::new(RuleBasedConfig::default()));
        let r = run_episode(&game, [&mut system, &mut user], seed, &EpisodeContext::eval(), &settings)
            .map_err(|e| e.to_string())?;
        ensure(r.outcome == OutcomeKind::Misagreement, || format!("seed {seed}: {:?}", r.outcome))?;
        ensure(r.rewards == expected, || format!("seed {seed}: rewards {:?}", r.rewards))?;
    }
    ensure(inst.misagreement([&[1, 1], &[0, 1]]) == [-0.9375, 0.1640625], || "hand values disagree".into())?;

    // Wider domains: the misheard value is random, the rewards follow the formula.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let wide = Instance::random(&mut rng, &[4, 3], Mode::Compounded, 0.0);
    let mut players = wide.game(50).players().to_vec();
    players[0].slot_error_rates = Some(vec![0.0, 1.0]);
    let game = negotiation_game::game::Game::new(wide.game(50).space().clone(), players, Mode::Compounded, 50).unwrap();
    for seed in 0..episodes {
        let (mut system, mut user) = (EagerAccepter, RuleBasedAgent::new(RuleBasedConfig::default()));
        let r = run_episode(&game, [&mut system, &mut user], seed, &EpisodeContext::eval(), &settings)
            .map_err(|e| e.to_string())?;
        ensure(r.outcome == OutcomeKind::Misagreement, || format!("wide seed {seed}: {:?}", r.outcome))?;
        let believed = r.believed.as_ref().ok_or("no believed options")?;
        let want = wide.misagreement([believed[0].values(), believed[1].values()]);
        ensure(r.rewards == want, || format!("wide seed {seed}: {:?} vs {want:?}", r.rewards))?;
    }
    Ok(format!("{} episodes, all misagreements with the hand-evaluated rewards", 2 * episodes))
}

fn criterion_8() -> Check {
    let config = ScenarioConfig {
        name: "reproducibility".into(),
        seed: 1234,
        space: SpaceSpec::Sizes { domain_sizes: vec![3, 2] },
        invalid_probability: 0.2,
        system: PlayerSpec { error_rate: 0.2, ..PlayerSpec::default() },
        user: PlayerSpec {
            costs: CostSpec::Sampled {
                option: negotiation_game::harness::CostDistribution::Exponential { mean: 0.5 },
                feature: negotiation_game::harness::CostDistribution::Uniform { low: 0.0, high: 0.2 },
            },
            ..PlayerSpec::default()
        },
        preset: None,
        agents: AgentsSpec {
            system: AgentSpec::QLearning(QLearningConfig::default()),
            user: AgentSpec::RuleBased(RuleBasedConfig::default()),
        },
        episodes: EpisodeCounts { train: 3000, eval: 1000 },
        ..ScenarioConfig::builtin()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let options = RunOptions { out_dir: Some(d.path().to_path_buf()), keep_records: false };
        run_benchmark(&config, &options).map_err(|e| e.to_string())?;
    }
    let mut bytes = 0;
    for file in ["episodes.jsonl", "summary.tsv", "qtable.system.tsv", "scenario.json", "config.toml"] {
        let a = std::fs::read(dirs[0].path().join(file)).map_err(|e| format!("{file}: {e}"))?;
        let b = std::fs::read(dirs[1].path().join(file)).map_err(|e| format!("{file}: {e}"))?;
        ensure(a == b, || format!("{file} differs between runs"))?;
        bytes += a.len();
    }
    Ok(format!("two runs byte-identical across 5 artifacts ({bytes} bytes)"))
}

fn main() -> ExitCode {
    let corpus = fuzz_corpus(100_000);
    let criteria: Vec<Criterion> = vec![
        ("1 zero-sum identity", Box::new(|| criterion_1(&corpus))),
        ("2 full-cooperation identity", Box::new(|| criterion_2(&corpus))),
        ("3 single-slot reduction", Box::new(criterion_3)),
        ("4 noise calibration", Box::new(criterion_4)),
        ("5 confidence separability", Box::new(criterion_5)),
        ("6 oracle equivalence", Box::new(criterion_6)),
        ("7 misagreement mechanics", Box::new(criterion_7)),
        ("8 reproducibility", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL criterion {name}: {reason}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
