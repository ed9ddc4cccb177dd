#include "fixtures.hpp"
#include "oracles.hpp"

#include "fxcog/dataset.hpp"
#include "fxcog/error.hpp"

#include <catch_amalgamated.hpp>

using namespace fxcog;

namespace {

struct World {
    PriceSeries prices;
    std::vector<MacroSeries> macro;
};

const World& world() {
    static const World w = [] {
        World x;
        x.prices = generate_synthetic(5, 700, Regime::random_walk);
        x.macro = generate_synthetic_macro(5, x.prices[0].date, x.prices[x.prices.size() - 1].date);
        return x;
    }();
    return w;
}

} // namespace

TEST_CASE("directional index matches a forward scan") {
    const auto s = fxtest::random_walk(41, 300);
    const auto c = s.closes();
    for (std::size_t n = 0; n < c.size(); ++n) CHECK(directional_index(c, n, 10) == fxtest::oracle::directional_index(c, n, 10));
    const std::vector<double> flat(20, 1.0);
    CHECK(*directional_index(flat, 0, 10) == 0.0);
}

TEST_CASE("labels cover all but the last h days") {
    for (std::size_t T : {11u, 12u, 50u, 333u}) {
        const auto s = fxtest::random_walk(T, T);
        const auto l = label(s, 10);
        CHECK(l.size() == T - 10);
        for (const auto& d : l) CHECK(d.target == (d.directional_index > 0 ? 1 : 0));
    }
    CHECK(label(fxtest::random_walk(1, 10), 10).empty());
}

TEST_CASE("model specs") {
    CHECK(model_spec(0).groups == std::vector{FeatureGroup::price});
    CHECK(model_spec(7).groups == std::vector{FeatureGroup::indicators, FeatureGroup::fundamentals,
                                              FeatureGroup::levels, FeatureGroup::divergence});
    CHECK(model_spec(9).groups.size() == 6);
    CHECK_THROWS_AS(model_spec(10), ConfigError);
    CHECK_THROWS_AS(model_spec(-1), ConfigError);
    for (auto g : kAllGroups) CHECK(parse_group(to_string(g)) == g);
}

TEST_CASE("assembled columns follow group order then name") {
    const auto store = build_feature_store(world().prices, world().macro);
    const auto t = assemble(model_spec(5), store);
    REQUIRE(t.cols() > 0);
    // indicators first, then the fundamentals block, then the four levels
    CHECK(t.columns.back() == "SR_S2");
    CHECK(t.columns[t.cols() - 4] == "SR_R1");
    const auto first_fund = std::ranges::find_if(t.columns, [](const std::string& c) { return c.starts_with("EA_"); });
    REQUIRE(first_fund != t.columns.end());
    CHECK(std::is_sorted(t.columns.begin(), first_fund));
    for (const auto& c : t.columns) CHECK_FALSE(c.starts_with("ICS_"));
}

TEST_CASE("assembled rows are complete and targets follow labels") {
    const auto store = build_feature_store(world().prices, world().macro);
    for (int id = 0; id < kModelCount; ++id) {
        const auto t = assemble(model_spec(id), store);
        INFO("model " << id);
        REQUIRE(t.rows() > 100);
        CHECK(t.values.size() == t.rows() * t.cols());
        CHECK(labeled_rows(t) == t.rows() - 10);
        for (double v : t.values) CHECK(std::isfinite(v));
        CHECK(std::is_sorted(t.dates.begin(), t.dates.end()));
    }
}

TEST_CASE("fundamental groups need macro data") {
    const auto store = build_feature_store(world().prices, {});
    CHECK_THROWS_AS(assemble(model_spec(2), store), ConfigError);
    CHECK_NOTHROW(assemble(model_spec(1), store));
}

TEST_CASE("frame text round trip") {
    const auto store = build_feature_store(world().prices, world().macro);
    const auto t = assemble(model_spec(8), store);
    const std::vector<std::string> prov{"model=8", "note=x"};
    const auto back = parse_frame(format_frame(t, prov));
    CHECK(back.model_id == 8);
    CHECK(back.columns == t.columns);
    CHECK(back.dates == t.dates);
    CHECK(back.values == t.values);
    CHECK(back.targets == t.targets);
    CHECK_THROWS_AS(parse_frame("date,a\n"), ParseError);
    CHECK_THROWS_AS(parse_frame("date,a,target\n2020-01-01,,1\n"), ParseError);
    CHECK_THROWS_AS(parse_frame("# only a comment\n"), EmptyInputError);
}

TEST_CASE("no look-ahead: prefix recomputation matches the full run") {
    const auto& w = world();
    const auto full = build_feature_store(w.prices, w.macro);
    Rng rng(9);
    for (int k = 0; k < 5; ++k) {
        const std::size_t cut = 300 + rng.below(w.prices.size() - 300);
        const auto part = build_feature_store(w.prices.prefix(cut + 1), w.macro);
        for (const auto& [g, cols] : part.columns)
            for (std::size_t c = 0; c < cols.size(); ++c) {
                INFO(cols[c].name);
                CHECK(cols[c].values[cut] == full.columns.at(g)[c].values[cut]);
            }
    }
}

TEST_CASE("scaler is fit on training rows only") {
    FeatureTable t;
    t.columns = {"a", "b"};
    for (int r = 0; r < 10; ++r) {
        t.dates.push_back(Date::from_ymd(2020, 1, 1) + r);
        t.values.push_back(r);
        t.values.push_back(5.0);
        t.targets.emplace_back(r % 2);
    }
    const auto sc = Scaler::fit(t, 0, 8, ScalingKind::min_max);
    CHECK(sc.offset[0] == 0.0);
    CHECK(sc.scale[0] == 7.0);
    CHECK(sc.apply(1, 5.0) == 0.0); // constant column
    const auto z = Scaler::fit(t, 0, 4, ScalingKind::z_score);
    CHECK(z.offset[0] == 1.5);
    CHECK(z.scale[0] == Catch::Approx(std::sqrt(1.25)));

    const auto split = scale_and_window(t, 3, 0.8);
    CHECK(split.train.size() == 6); // windows ending at rows 2..7
    CHECK(split.test.size() == 2);  // rows 8, 9
    CHECK(split.train.scaler.scale[0] == 7.0);
    CHECK(split.test.dates.front() == t.dates[8]);
    // the first test window reaches back into training rows
    const auto s0 = split.test.sample(0);
    CHECK(s0[0] == 6.0 / 7.0);
    CHECK(s0[4] == 8.0 / 7.0);
    CHECK(split.test.targets == std::vector<int>{0, 1});
    CHECK_THROWS_AS(scale_and_window(t, 9, 0.8), PreconditionError);
    CHECK_THROWS_AS(scale_and_window(t, 3, 1.0), ConfigError);
}

TEST_CASE("unlabeled rows become inference windows") {
    const auto store = build_feature_store(world().prices, world().macro);
    const auto t = assemble(model_spec(1), store);
    const auto sc = Scaler::fit(t, 0, 100, ScalingKind::min_max);
    const auto ds = make_windows(t, sc, 20, labeled_rows(t), t.rows(), Split::inference);
    CHECK(ds.size() == 10);
    for (int y : ds.targets) CHECK(y == -1);
    CHECK(ds.inputs.size() == 10 * 20 * t.cols());
}
