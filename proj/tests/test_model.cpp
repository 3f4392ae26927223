#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "quare/model.hpp"

using namespace quare;

namespace {

Requirement make_requirement(const std::string& id, const std::string& description) {
    Requirement r;
    r.id = id;
    r.description = description;
    r.dimension = QualityDimension::Safety;
    r.level = KaosLevel::Tactical;
    r.source_agent = "Safety";
    return r;
}

} // namespace

TEST_CASE("quality dimensions: five members in stable axis order") {
    const auto dims = all_dimensions();
    CHECK(dims.size() == 5);
    CHECK(to_string(dims[0]) == "Safety");
    CHECK(to_string(dims[4]) == "Responsibility");
    for (auto d : dims) CHECK(dimension_from_string(to_string(d)) == d);
    CHECK_THROWS_AS(dimension_from_string("Velocity"), std::invalid_argument);
}

TEST_CASE("kaos levels: total order and floor") {
    CHECK(static_cast<int>(KaosLevel::Strategic) > static_cast<int>(KaosLevel::Tactical));
    CHECK(static_cast<int>(KaosLevel::Tactical) > static_cast<int>(KaosLevel::Operational));
    CHECK(level_below(KaosLevel::Strategic) == KaosLevel::Tactical);
    CHECK(level_below(KaosLevel::Tactical) == KaosLevel::Operational);
    CHECK(level_below(KaosLevel::Operational) == KaosLevel::Operational);
}

TEST_CASE("new_uniform_weights") {
    CHECK(new_uniform_weights(5) == std::vector<double>{0.2, 0.2, 0.2, 0.2, 0.2});
    CHECK(new_uniform_weights(1) == std::vector<double>{1.0});
    CHECK(new_uniform_weights(4) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
    double sum = 0.0;
    for (double w : new_uniform_weights(7)) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(new_uniform_weights(0), std::invalid_argument);
}

TEST_CASE("run config defaults reproduce the reference configuration") {
    RunConfig config;
    CHECK(config.tau_overlap == 0.85);
    CHECK(config.round_cap == 3);
    CHECK(config.temperature == 0.7);
    CHECK(config.max_tokens == 4000);
    CHECK(config.seeds == std::vector<int>{101, 202, 303});
    CHECK_NOTHROW(config.validate());

    SUBCASE("invalid weights rejected") {
        config.weights = {0.5, 0.5, 0.5, 0.0, 0.0};
        CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    }
    SUBCASE("tau bounds enforced") {
        config.tau_overlap = 1.0;
        CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    }
    SUBCASE("round cap at least one") {
        config.round_cap = 0;
        CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    }
}

TEST_CASE("validate_requirement_set reports exactly the broken invariants") {
    RequirementSet set;
    set.requirements = {make_requirement("G1", "first"), make_requirement("G2", "second")};
    CHECK(validate_requirement_set(set).empty());

    SUBCASE("duplicate ids") {
        set.requirements.push_back(make_requirement("G1", "again"));
        const auto report = validate_requirement_set(set);
        REQUIRE(report.findings.size() == 1);
        CHECK(report.findings[0].kind == "duplicate-id");
        CHECK(report.findings[0].subject == "G1");
    }
    SUBCASE("empty description") {
        set.requirements.push_back(make_requirement("G3", ""));
        const auto report = validate_requirement_set(set);
        REQUIRE(report.findings.size() == 1);
        CHECK(report.findings[0].kind == "empty-description");
    }
    SUBCASE("dangling ancestry") {
        set.requirements[0].ancestry = {"GHOST"};
        const auto report = validate_requirement_set(set);
        REQUIRE(report.findings.size() == 1);
        CHECK(report.findings[0].kind == "dangling-ancestry");
    }
    SUBCASE("ancestry pointing at a member is fine") {
        set.requirements[1].ancestry = {"G1"};
        CHECK(validate_requirement_set(set).empty());
    }
}

TEST_CASE("conflict status transitions never regress") {
    CHECK(status_transition_allowed(ConflictStatus::Unresolved, ConflictStatus::Partial));
    CHECK(status_transition_allowed(ConflictStatus::Unresolved, ConflictStatus::Escalated));
    CHECK(status_transition_allowed(ConflictStatus::Partial, ConflictStatus::Consensus));
    CHECK(status_transition_allowed(ConflictStatus::Partial, ConflictStatus::Escalated));
    CHECK_FALSE(status_transition_allowed(ConflictStatus::Consensus, ConflictStatus::Partial));
    CHECK_FALSE(status_transition_allowed(ConflictStatus::Escalated, ConflictStatus::Unresolved));
    CHECK_FALSE(status_transition_allowed(ConflictStatus::Consensus, ConflictStatus::Escalated));

    Conflict c;
    c.left_id = "A";
    c.right_id = "B";
    c.advance_status(ConflictStatus::Partial);
    c.advance_status(ConflictStatus::Consensus);
    CHECK_THROWS_AS(c.advance_status(ConflictStatus::Partial), std::logic_error);
}

TEST_CASE("serialization round-trips every core type") {
    Requirement r = make_requirement("S-TG2", "Sensor fusion latency <= 500 ms");
    r.rationale = "dual-channel verification";
    r.ancestry = {"S-TG1"};

    SUBCASE("requirement") {
        Json j = r;
        CHECK(j["id"] == "S-TG2");
        CHECK(j["dimension"] == "Safety");
        CHECK(j.at("level") == "Tactical");
        CHECK(j.get<Requirement>() == r);
    }
    SUBCASE("requirement set") {
        RequirementSet set;
        set.phase_label = 2;
        set.requirements = {r, make_requirement("E-TG1", "Planning cycle <= 100 ms")};
        Json j = set;
        CHECK(j.get<RequirementSet>() == set);
    }
    SUBCASE("quality vector") {
        QualityVector v{{0.1, 0.2, 0.3, 0.4, 0.5}};
        Json j = v;
        CHECK(j.get<QualityVector>() == v);
    }
    SUBCASE("conflict with rounds") {
        Conflict c;
        c.left_id = "E-TG1";
        c.right_id = "S-TG2";
        c.kind = ConflictKind::ResourceBound;
        c.severity = 0.76;
        c.similarity = 0.91;
        RoundRecord round;
        round.round_index = 1;
        round.focus_agent = "Safety";
        round.thesis = "keep 500 ms";
        round.critiques = {{"Efficiency", "too slow"}};
        round.synthesis = "split the budget";
        round.similarity_to_previous = 0.42;
        round.status_after = ConflictStatus::Partial;
        c.rounds = {round};
        Json j = c;
        CHECK(j.get<Conflict>() == c);
    }
    SUBCASE("kaos model") {
        KaosModel model;
        model.nodes = {{"SG1", KaosLevel::Strategic, "stay safe", {"S-SG1"}},
                       {"TG1", KaosLevel::Tactical, "bound latency", {"S-TG2"}}};
        model.edges = {{"SG1", "TG1"}};
        Json j = model;
        CHECK(j.get<KaosModel>() == model);
    }
    SUBCASE("run config") {
        RunConfig config;
        config.clause_corpus = "clauses.jsonl";
        config.domain_tags = {"automotive"};
        Json j = config;
        CHECK(j.get<RunConfig>() == config);
    }
}
