#include <jellium/validation.hpp>

#include <jellium/edge_laws.hpp>
#include <jellium/errors.hpp>
#include <jellium/exact_radii.hpp>
#include <jellium/rng.hpp>

#include <algorithm>
#include <sstream>

namespace jellium {

namespace {

void stamp(EcdfReport& r, const GasParams& p, std::uint64_t seed) {
    r.params.insert(r.params.begin(), {{"n", static_cast<double>(p.n())},
                                       {"beta", p.beta()},
                                       {"alpha", p.alpha()},
                                       {"R", p.R()}});
    r.seed = seed;
}

std::string gas_label(const GasParams& p) {
    std::ostringstream os;
    os << "n=" << p.n() << ", beta=" << p.beta() << ", alpha=" << p.alpha() << ", R=" << p.R();
    return os.str();
}

}  // namespace

CriterionOutcome validate_edge_L(const ValidationOptions& opts) {
    const GasParams p = opts.params_override.value_or(GasParams(200, 2.0, 201.0, 1.0));
    require_integrable(p);
    const TrialBatch batch = sample_max_batch(p, opts.edge_L_trials, opts.seed, opts.threads);
    LimitLawSpec spec;
    spec.kind = LawKind::HeavyTailL;
    spec.kappa = p.kappa_n();
    spec.R = p.R();
    const ContinuousLaw law = make_law(spec);
    EcdfReport r = ks_against_law(batch.values, law, 0.05);
    stamp(r, p, opts.seed);
    r.params.emplace_back("trials", opts.edge_L_trials);
    return {"edge_L", "maxima (" + gas_label(p) + ") vs " + law.name + ": KS < 0.05", r.passed, {r}};
}

CriterionOutcome validate_edge_gumbel(const ValidationOptions& opts) {
    const GasParams p = opts.params_override.value_or(GasParams(5000, 2.0, 20000.0, 2.0));
    require_integrable(p);
    const EdgeScalings sc = edge_scalings(p);
    const TrialBatch batch = sample_max_batch(p, opts.edge_gumbel_trials, opts.seed, opts.threads);

    LimitLawSpec exact_spec;
    exact_spec.kind = LawKind::ExactMax;
    exact_spec.params = p;
    EcdfReport exact = ks_against_law(batch.values, make_law(exact_spec), 0.03);
    stamp(exact, p, opts.seed);
    exact.params.emplace_back("trials", opts.edge_gumbel_trials);

    std::vector<double> scaled;
    scaled.reserve(batch.values.size());
    for (double m : batch.values)
        scaled.push_back(sc.a_n * (m - sc.b_n));
    EcdfReport gumbel = ks_against_law(scaled, make_law(LimitLawSpec{}), 0.15);
    stamp(gumbel, p, opts.seed);
    gumbel.params.emplace_back("trials", opts.edge_gumbel_trials);
    gumbel.params.emplace_back("a_n", sc.a_n);
    gumbel.params.emplace_back("b_n", sc.b_n);
    gumbel.params.emplace_back("c_n", sc.c_n);

    return {"edge_gumbel",
            "maxima (" + gas_label(p) + ") vs exact finite-n CDF: KS < 0.03; a_n (max - b_n) vs Gumbel: KS < 0.15",
            exact.passed && gumbel.passed,
            {exact, gumbel}};
}

CriterionOutcome validate_bulk(const ValidationOptions& opts) {
    const GasParams p = opts.params_override.value_or(GasParams(500, 2.0, 2000.0, 2.0));
    require_integrable(p);
    const std::vector<ChainResult> chains = run_chains(p, opts.bulk_schedule, opts.seed, opts.bulk_chains, opts.threads);
    const std::vector<double> moduli = pooled_moduli(chains);
    EcdfReport r = radial_bulk_report(moduli, p, 0.05);
    r.seed = opts.seed;
    r.params.emplace_back("steps", static_cast<double>(opts.bulk_schedule.steps));
    r.params.emplace_back("chains", opts.bulk_chains);
    r.params.emplace_back("acceptance_rate", chains.empty() ? 0.0 : chains.front().diagnostics.acceptance_rate);
    return {"bulk", "pooled MCMC moduli (" + gas_label(p) + ") vs min(1, lambda r^2/R^2): KS < 0.05", r.passed, {r}};
}

CriterionOutcome validate_cross_sampler(const ValidationOptions& opts) {
    const GasParams p = opts.params_override.value_or(GasParams(8, 2.0, 32.0, 2.0));
    require_integrable(p);
    std::vector<double> exact;
    for (const RadialSample& s : sample_radii_batch(p, opts.cross_exact_trials, opts.seed, opts.threads))
        exact.insert(exact.end(), s.moduli().begin(), s.moduli().end());
    // the chains get their own base seed so no stream is shared with the exact sampler
    const std::uint64_t chain_seed = derive_stream_seed(opts.seed, 0xC0FFEEULL);
    const std::vector<double> mcmc =
        pooled_moduli(run_chains(p, opts.cross_schedule, chain_seed, opts.cross_chains, opts.threads));
    EcdfReport r = ks_two_sample(exact, mcmc, 0.05, "MCMC moduli (MALA)");
    stamp(r, p, opts.seed);
    return {"cross_sampler", "exact vs MCMC moduli (" + gas_label(p) + "): two-sample KS < 0.05", r.passed, {r}};
}

std::vector<std::string> validation_suite_names() {
    return {"edge_L", "edge_gumbel", "bulk", "cross_sampler", "all"};
}

std::vector<CriterionOutcome> run_validation_suite(const std::string& suite, const ValidationOptions& opts) {
    const auto names = validation_suite_names();
    if (std::find(names.begin(), names.end(), suite) == names.end())
        throw Error(ErrorCode::InvalidParams,
                    "unknown suite '" + suite + "' (expected edge_L, edge_gumbel, bulk, cross_sampler or all)");
    if (opts.params_override)
        require_integrable(*opts.params_override);
    std::vector<CriterionOutcome> out;
    const bool all = suite == "all";
    if (all || suite == "edge_L")
        out.push_back(validate_edge_L(opts));
    if (all || suite == "edge_gumbel")
        out.push_back(validate_edge_gumbel(opts));
    if (all || suite == "bulk")
        out.push_back(validate_bulk(opts));
    if (all || suite == "cross_sampler")
        out.push_back(validate_cross_sampler(opts));
    return out;
}

}  // namespace jellium
