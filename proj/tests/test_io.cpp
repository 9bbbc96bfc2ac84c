#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "peakreg/io.hpp"

using namespace peakreg;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

struct FileGuard {
    std::string path;
    ~FileGuard() { std::filesystem::remove(path); }
};

std::vector<std::string> key_order(const ordered_json& j) {
    std::vector<std::string> keys;
    for (const auto& item : j.items()) keys.push_back(item.key());
    return keys;
}

} // namespace

TEST_CASE("trace CSV round-trips through write and load") {
    PeakCategory c;
    c.shape = PeakShape::Triangular;
    c.width = PeakWidthClass::Wide;
    TraceSeries trace = synth_trace(c, 180, 20.0);
    trace.start_time = 1700000000;

    const std::string path = temp_path("peakreg_io_trace.csv");
    FileGuard guard{path};
    write_trace_csv(trace, path);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "timestamp,power_mw");

    const TraceSeries back = load_trace_csv(path);
    REQUIRE(back.size() == trace.size());
    CHECK(back.t_s == trace.t_s);
    CHECK(back.start_time == trace.start_time);
    for (std::size_t i = 0; i < trace.size(); ++i)
        CHECK_THAT(back.samples[i], WithinAbs(trace.samples[i], 5e-7));   // %.6f quantization
}

TEST_CASE("regulation CSV round-trips and clamps the band edge") {
    RegulationModel m;
    m.seed = 5;
    const RegulationSeries reg = synth_regulation(m, 90, 20.0);
    const std::string path = temp_path("peakreg_io_reg.csv");
    FileGuard guard{path};
    write_regulation_csv(reg, path);

    const RegulationSeries back = load_regulation_csv(path);
    REQUIRE(back.samples.size() == reg.samples.size());
    CHECK(back.t_s == reg.t_s);
    for (std::size_t i = 0; i < reg.samples.size(); ++i)
        CHECK_THAT(back.samples[i], WithinAbs(reg.samples[i], 5e-7));

    SECTION("slight overshoot from rounding is clamped") {
        write_text(path, "timestamp,r\n0,1.0005\n20,-1.0005\n");
        const RegulationSeries clamped = load_regulation_csv(path);
        CHECK(clamped.samples[0] == 1.0);
        CHECK(clamped.samples[1] == -1.0);
    }
    SECTION("a real band violation is rejected") {
        write_text(path, "timestamp,r\n0,1.5\n20,0\n");
        CHECK_THROWS_WITH(load_regulation_csv(path), ContainsSubstring("outside [-1,1]"));
    }
}

TEST_CASE("CSV loaders reject malformed input") {
    const std::string path = temp_path("peakreg_io_bad.csv");
    FileGuard guard{path};

    SECTION("wrong header") {
        write_text(path, "time,power\n0,1\n20,1\n");
        CHECK_THROWS_WITH(load_trace_csv(path), ContainsSubstring("expected header"));
    }
    SECTION("missing comma") {
        write_text(path, "timestamp,power_mw\n0 1\n20 1\n");
        CHECK_THROWS_WITH(load_trace_csv(path), ContainsSubstring("missing comma"));
    }
    SECTION("non-numeric field") {
        write_text(path, "timestamp,power_mw\n0,one\n20,1\n");
        CHECK_THROWS_WITH(load_trace_csv(path), ContainsSubstring("bad number"));
    }
    SECTION("negative power") {
        write_text(path, "timestamp,power_mw\n0,1\n20,-0.5\n");
        CHECK_THROWS_WITH(load_trace_csv(path), ContainsSubstring("negative power"));
    }
    SECTION("non-uniform spacing") {
        write_text(path, "timestamp,power_mw\n0,1\n20,1\n50,1\n");
        CHECK_THROWS_WITH(load_trace_csv(path), ContainsSubstring("non-uniform"));
    }
    SECTION("too short to infer a step") {
        write_text(path, "timestamp,power_mw\n0,1\n");
        CHECK_THROWS_WITH(load_trace_csv(path), ContainsSubstring("at least two rows"));
    }
    SECTION("missing file") {
        CHECK_THROWS_WITH(load_trace_csv(temp_path("peakreg_io_nope.csv")),
                          ContainsSubstring("cannot open"));
    }
}

TEST_CASE("resampling averages whole windows") {
    SECTION("constant trace stays constant") {
        const TraceSeries trace{std::vector<double>(40, 2.5), 5.0, 0};
        const TraceSeries out = resample(trace, 20.0);
        REQUIRE(out.size() == 10);
        CHECK(out.t_s == 20.0);
        for (double v : out.samples) CHECK(v == 2.5);
    }
    SECTION("0.0..0.9 collapses to its mean") {
        TraceSeries trace{{}, 2.0, 0};
        for (int i = 0; i < 10; ++i) trace.samples.push_back(0.1 * i);
        const TraceSeries out = resample(trace, 20.0);
        REQUIRE(out.size() == 1);
        CHECK_THAT(out.samples[0], WithinAbs(0.45, 1e-12));
    }
    SECTION("1800 samples at 2 s become 180 at 20 s") {
        TraceSeries trace{{}, 2.0, 7200};
        for (int i = 0; i < 1800; ++i) trace.samples.push_back(static_cast<double>(i % 10));
        const TraceSeries out = resample(trace, 20.0);
        REQUIRE(out.size() == 180);
        CHECK(out.start_time == 7200);
        for (double v : out.samples) CHECK(v == 4.5);   // mean of 0..9, exact in binary
    }
    SECTION("unit ratio is the identity") {
        const TraceSeries trace{{1.0, 2.0, 3.0}, 20.0, 9};
        const TraceSeries out = resample(trace, 20.0);
        CHECK(out.samples == trace.samples);
        CHECK(out.start_time == trace.start_time);
    }
    SECTION("two stages compose to one") {
        const TraceSeries trace{{1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0}, 4.0, 0};
        const TraceSeries direct = resample(trace, 16.0);
        const TraceSeries staged = resample(resample(trace, 8.0), 16.0);
        CHECK(direct.samples == staged.samples);
        CHECK(direct.samples == std::vector<double>{2.5, 6.5});
    }
    SECTION("trailing partial window is dropped") {
        const TraceSeries trace{std::vector<double>(25, 1.0), 2.0, 0};
        CHECK(resample(trace, 20.0).size() == 2);
    }
    SECTION("non-integer ratio is rejected") {
        const TraceSeries trace{std::vector<double>(30, 1.0), 8.0, 0};
        CHECK_THROWS_AS(resample(trace, 20.0), std::invalid_argument);
    }
    SECTION("upsampling is rejected") {
        const TraceSeries trace{std::vector<double>(30, 1.0), 20.0, 0};
        CHECK_THROWS_AS(resample(trace, 10.0), std::invalid_argument);
    }
    SECTION("regulation series resample matches the trace path") {
        RegulationSeries reg{{0.5, -0.5, 1.0, 0.0}, 10.0};
        const RegulationSeries out = resample(reg, 20.0);
        REQUIRE(out.samples.size() == 2);
        CHECK(out.samples[0] == 0.0);
        CHECK(out.samples[1] == 0.5);
    }
}

TEST_CASE("hour windowing slices whole hours") {
    TraceSeries trace{{}, 20.0, 1000};
    for (int i = 0; i < 360; ++i) trace.samples.push_back(static_cast<double>(i));

    SECTION("exact two hours") {
        const auto windows = window_hours(trace);
        REQUIRE(windows.size() == 2);
        CHECK(windows[0].size() == 180);
        CHECK(windows[0].start_time == 1000);
        CHECK(windows[1].start_time == 1000 + 3600);
        CHECK(windows[0].samples.front() == 0.0);
        CHECK(windows[1].samples.front() == 180.0);
        CHECK(windows[1].samples.back() == 359.0);
    }
    SECTION("trailing partial hour is dropped") {
        trace.samples.resize(200);
        const auto windows = window_hours(trace);
        REQUIRE(windows.size() == 1);
        CHECK(windows[0].size() == 180);
    }
    SECTION("step must divide the hour") {
        trace.t_s = 7.0;
        CHECK_THROWS_WITH(window_hours(trace), ContainsSubstring("does not divide"));
    }
}

TEST_CASE("config file parsing") {
    const std::string path = temp_path("peakreg_io_cfg.txt");
    FileGuard guard{path};

    SECTION("defaults survive an empty file") {
        write_text(path, "# nothing but a comment\n\n");
        const Config cfg = parse_config(path);
        CHECK(cfg.lambda_elec == 50.0);
        CHECK(cfg.lambda_peak_monthly == 29200.0);
        CHECK(cfg.hours_per_month == 730.0);
        CHECK(cfg.lambda_c == 30.0);
        CHECK(cfg.lambda_b == 5.0);
        CHECK(cfg.lambda_mis == 30.0);
        CHECK(cfg.battery_p_mw == -1.0);
        CHECK(cfg.battery_e_mwh == -1.0);
        CHECK(cfg.baseline_mode == BaselineMode::PeakPlan);
        CHECK(cfg.net_energy_zero);
        CHECK(cfg.capacity_cap_ratio == 1.0);   // bids stay within the rating
        CHECK(cfg.f == kDefaultCappingFraction);
        CHECK(cfg.nocp_gap_s == kDefaultNocpGapSeconds);
        CHECK(cfg.seed == 42);
    }
    SECTION("every documented key is accepted") {
        write_text(path,
                   "lambda_elec = 60  # trailing comment\n"
                   "lambda_peak_monthly = 8000\n"
                   "hours_per_month = 720\n"
                   "lambda_c = 25\n"
                   "lambda_b = 4\n"
                   "lambda_mis = 150\n"
                   "battery.p_mw = 0.4\n"
                   "battery.e_mwh = 0.1\n"
                   "battery.soc_ini = 0.5\n"
                   "battery.soc_min = 0.1\n"
                   "battery.soc_max = 0.95\n"
                   "f = 0.25\n"
                   "nocp_gap_s = 120\n"
                   "baseline_mode = raw\n"
                   "net_energy_zero = false\n"
                   "capacity_cap_ratio = 2.5\n"
                   "solver.tol = 1e-9\n"
                   "reg_model.sigma = 0.4\n"
                   "seed = 7\n");
        const Config cfg = parse_config(path);
        CHECK(cfg.lambda_elec == 60.0);
        CHECK(cfg.lambda_peak_monthly == 8000.0);
        CHECK(cfg.hours_per_month == 720.0);
        CHECK(cfg.lambda_c == 25.0);
        CHECK(cfg.lambda_b == 4.0);
        CHECK(cfg.lambda_mis == 150.0);
        CHECK(cfg.battery_p_mw == 0.4);
        CHECK(cfg.battery_e_mwh == 0.1);
        CHECK(cfg.battery_soc_ini == 0.5);
        CHECK(cfg.battery_soc_min == 0.1);
        CHECK(cfg.battery_soc_max == 0.95);
        CHECK(cfg.f == 0.25);
        CHECK(cfg.nocp_gap_s == 120.0);
        CHECK(cfg.baseline_mode == BaselineMode::Raw);
        CHECK_FALSE(cfg.net_energy_zero);
        CHECK(cfg.capacity_cap_ratio == 2.5);
        CHECK(cfg.solver_tol == 1e-9);
        CHECK(cfg.reg_sigma == 0.4);
        CHECK(cfg.seed == 7);
    }
    SECTION("booleans accept 0/1 spellings") {
        write_text(path, "net_energy_zero = 0\n");
        CHECK_FALSE(parse_config(path).net_energy_zero);
        write_text(path, "net_energy_zero = 1\n");
        CHECK(parse_config(path).net_energy_zero);
        write_text(path, "net_energy_zero = maybe\n");
        CHECK_THROWS_WITH(parse_config(path), ContainsSubstring("boolean expected"));
    }
    SECTION("unknown keys are rejected with the line number") {
        write_text(path, "lambda_elec = 60\nlambda_nope = 3\n");
        CHECK_THROWS_WITH(parse_config(path),
                          ContainsSubstring("unknown key 'lambda_nope' at line 2"));
    }
    SECTION("lines need an equals sign") {
        write_text(path, "lambda_elec 60\n");
        CHECK_THROWS_WITH(parse_config(path), ContainsSubstring("key=value"));
    }
    SECTION("baseline mode spellings") {
        for (const auto& [text, mode] :
             std::vector<std::pair<std::string, BaselineMode>>{{"raw", BaselineMode::Raw},
                                                               {"peak_plan", BaselineMode::PeakPlan},
                                                               {"free", BaselineMode::Free}}) {
            write_text(path, "baseline_mode = " + text + "\n");
            CHECK(parse_config(path).baseline_mode == mode);
        }
        write_text(path, "baseline_mode = fancy\n");
        CHECK_THROWS_AS(parse_config(path), std::invalid_argument);
    }
}

TEST_CASE("config derives battery and tariff") {
    Config cfg;
    const TraceSeries trace{{1.0, 2.0, 1.5}, 20.0, 0};

    SECTION("battery defaults come from the trace") {
        const auto [bat, defaulted] = cfg.battery_for(trace);
        CHECK(defaulted);
        CHECK(bat.power_cap == 2.0);
        CHECK_THAT(bat.energy_cap, WithinAbs(2.0 / 6.0, 1e-15));
        CHECK(bat.soc_ini == 0.55);
        CHECK(bat.soc_min == 0.2);
        CHECK(bat.soc_max == 0.9);
    }
    SECTION("explicit sizing is taken verbatim") {
        cfg.battery_p_mw = 0.4;
        cfg.battery_e_mwh = 0.25;
        const auto [bat, defaulted] = cfg.battery_for(trace);
        CHECK_FALSE(defaulted);
        CHECK(bat.power_cap == 0.4);
        CHECK(bat.energy_cap == 0.25);
    }
    SECTION("half-specified sizing is still flagged") {
        cfg.battery_p_mw = 0.4;
        const auto [bat, defaulted] = cfg.battery_for(trace);
        CHECK(defaulted);
        CHECK_THAT(bat.energy_cap, WithinAbs(0.4 / 6.0, 1e-15));
    }
    SECTION("invalid SoC bounds surface through validation") {
        cfg.battery_soc_min = 0.9;
        cfg.battery_soc_max = 0.2;
        CHECK_THROWS_AS(cfg.battery_for(trace), std::invalid_argument);
    }
    SECTION("per-step tariff scaling") {
        const Tariff t = cfg.tariff_for(20.0, 2.0);
        const double step_h = 20.0 / 3600.0;
        CHECK_THAT(t.lambda_elec, WithinAbs(50.0 * step_h, 1e-15));
        CHECK_THAT(t.lambda_mis, WithinAbs(30.0 * step_h, 1e-15));
        CHECK_THAT(t.lambda_b, WithinAbs(5.0 * step_h, 1e-15));
        CHECK_THAT(t.lambda_peak, WithinAbs(29200.0 / 730.0 * 2.0, 1e-12));
        CHECK_THAT(t.lambda_c, WithinAbs(60.0, 1e-12));
    }
    SECTION("solver options passthrough") {
        cfg.net_energy_zero = false;
        cfg.baseline_mode = BaselineMode::Free;
        cfg.capacity_cap_ratio = 0.0;   // disables the cap
        cfg.solver_tol = 1e-9;
        const SolveOptions o = cfg.solve_options();
        CHECK_FALSE(o.net_energy_zero);
        CHECK(o.baseline_mode == BaselineMode::Free);
        CHECK(o.capacity_cap_ratio == kInf);
        CHECK(o.lp.feas_tol == 1e-9);
    }
    SECTION("config echo lists every key in order") {
        const ordered_json echo = cfg.echo();
        CHECK(key_order(echo) ==
              std::vector<std::string>{
                  "lambda_elec", "lambda_peak_monthly", "hours_per_month", "lambda_c", "lambda_b",
                  "lambda_mis", "battery.p_mw", "battery.e_mwh", "battery.soc_ini",
                  "battery.soc_min", "battery.soc_max", "f", "nocp_gap_s", "baseline_mode",
                  "net_energy_zero", "capacity_cap_ratio", "solver.tol", "reg_model.sigma", "seed"});
        CHECK(echo["baseline_mode"] == "peak_plan");
    }
}

TEST_CASE("JSON reports are complete and deterministic") {
    SECTION("bill breakdown keys and values") {
        BillBreakdown b;
        b.energy_cost = 1.0;
        b.peak_cost = 2.0;
        b.battery_cost = 0.5;
        b.mismatch_penalty = 0.25;
        b.capacity_revenue = 3.0;
        b.total = 0.75;
        const ordered_json j = breakdown_json(b);
        CHECK(key_order(j) == std::vector<std::string>{"energy_cost", "peak_cost", "battery_cost",
                                                       "mismatch_penalty", "capacity_revenue",
                                                       "total"});
        CHECK(j["total"] == 0.75);
        CHECK(j["capacity_revenue"] == 3.0);
    }
    SECTION("cdf serialization") {
        const ordered_json j = cdf_json({{1.0, 0.5}, {2.0, 1.0}});
        REQUIRE(j.is_array());
        REQUIRE(j.size() == 2);
        CHECK(j[0][0] == 1.0);
        CHECK(j[1][1] == 1.0);
    }
    SECTION("empty sweep still emits a zeroed summary") {
        const ordered_json doc = sweep_report_json(Config{}.echo(), SweepResult{});
        CHECK(doc["per_window"].empty());
        CHECK(doc["summary"]["hours_total"] == 0);
        CHECK(doc["summary"]["probability"] == 0.0);
        CHECK(doc["summary"]["q_cdf"].empty());
    }
    SECTION("sweep report round-trips and its CDF is monotone") {
        const TraceSeries trace = synth_trace(PeakCategory{}, 360, 20.0, 30);
        RegulationModel m;
        m.seed = 9;
        const RegulationSeries reg = synth_regulation(m, 360, 20.0);
        const BatterySpec bat{0.5, 0.1, 0.55, 0.1, 0.95};
        Config cfg;
        const SweepResult res = sweep(trace, reg, bat, cfg.tariff_for(20.0), cfg.solve_options());

        const ordered_json doc = sweep_report_json(cfg.echo(), res);
        CHECK(doc["per_window"].size() == 2);
        CHECK(key_order(doc) == std::vector<std::string>{"config_echo", "per_window", "summary"});
        CHECK(key_order(doc["per_window"][0]) ==
              std::vector<std::string>{"index", "J", "J_p", "J_r", "J_star", "q", "superlinear",
                                       "bill_breakdowns"});

        const auto& cdf = doc["summary"]["q_cdf"];
        for (std::size_t i = 1; i < cdf.size(); ++i) {
            CHECK(cdf[i][0].get<double>() > cdf[i - 1][0].get<double>());
            CHECK(cdf[i][1].get<double>() >= cdf[i - 1][1].get<double>());
        }
        if (!cdf.empty()) CHECK(cdf[cdf.size() - 1][1].get<double>() == 1.0);

        // Byte determinism: a fresh computation serializes identically.
        const SweepResult again =
            sweep(trace, reg, bat, cfg.tariff_for(20.0), cfg.solve_options());
        CHECK(sweep_report_json(cfg.echo(), again).dump(2) == doc.dump(2));

        // Text round-trip preserves the document.
        CHECK(ordered_json::parse(doc.dump(2)) == doc);

        const std::string path = temp_path("peakreg_io_report.json");
        FileGuard guard{path};
        write_report_json(cfg.echo(), res, path);
        std::ifstream in(path);
        std::stringstream buf;
        buf << in.rdbuf();
        CHECK(buf.str() == doc.dump(2) + "\n");
    }
    SECTION("category table carries the label columns") {
        PeakCategory c;
        c.shape = PeakShape::Triangular;
        c.width = PeakWidthClass::Wide;
        c.count = 2;
        CategoryOutcome row;
        row.category = c;
        row.trials = 10;
        row.superlinear_count = 4;
        row.probability = 0.4;
        row.mean_q = 0.01;
        const ordered_json doc = category_table_json(Config{}.echo(), {row});
        REQUIRE(doc["categories"].size() == 1);
        const auto& r = doc["categories"][0];
        CHECK(r["name"] == category_name(c));
        CHECK(r["shape"] == "triangular");
        CHECK(r["width"] == "wide");
        CHECK(r["height"] == "low");
        CHECK(r["count"] == 2);
        CHECK(r["probability"] == 0.4);
    }
    SECTION("peak statistics document") {
        PeakCategory c;
        const TraceSeries day = synth_trace(c, 4320, 20.0, 600);
        const PeakStats stats = peak_statistics(day);
        const ordered_json doc = peak_stats_json(Config{}.echo(), stats);
        CHECK(doc["day_count"] == 1);
        CHECK(doc["total_peaks"] == 1);
        CHECK(doc["has_partial_days"] == false);
        CHECK(doc["nocp_histogram"]["1"] == 1);
        CHECK(doc["day_shapes"].size() == 1);
    }
}
