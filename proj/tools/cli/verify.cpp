#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include "commands.hpp"
#include "radarcast/hash.hpp"
#include "radarcast/preprocess.hpp"
#include "radarcast/sequence.hpp"
#include "radarcast/verification.hpp"
#include "support.hpp"
#include "svg.hpp"

namespace radarcast::cli {

namespace {

nlohmann::json number(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double value(const nlohmann::json& j)
{
    return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> to_db(const std::vector<double>& power)
{
    std::vector<double> out;
    for (double p : power)
        out.push_back(10.0 * std::log10(std::max(p, 1e-12)));
    return out;
}

nlohmann::json sal_json(const SalScore& s)
{
    return {{"S", number(s.structure_defined ? s.S : NAN)},
            {"A", number(s.amplitude_defined ? s.A : NAN)},
            {"L", number(s.structure_defined ? s.L : NAN)}};
}

std::vector<std::filesystem::path> member_files(const VerifyOptions& o)
{
    std::vector<std::filesystem::path> files(o.members.begin(), o.members.end());
    if (!o.forecast_dir.empty()) {
        require_input(o.forecast_dir, "forecast directory");
        std::vector<std::filesystem::path> found;
        for (const auto& e : std::filesystem::directory_iterator(o.forecast_dir)) {
            const auto name = e.path().filename().string();
            if (name.rfind("member_", 0) == 0 && e.path().extension() == ".rprc")
                found.push_back(e.path());
        }
        std::sort(found.begin(), found.end());
        files.insert(files.end(), found.begin(), found.end());
    }
    if (files.empty())
        throw InvalidArgument("no ensemble members given (use --forecast or --members)");
    for (const auto& f : files)
        require_input(f, "member file");
    return files;
}

}  // namespace

int run_verify(const VerifyOptions& o)
{
    const auto doc = load_config(o.config);
    const auto sec = section(doc, "verify");
    const auto pre = section_as<PreprocessSpec>(doc, "preprocess");
    pre.validate();
    std::vector<double> thresholds = o.thresholds;
    std::uint64_t seed = 0;
    try {
        if (thresholds.empty())
            thresholds = sec.value("thresholds_mmh", std::vector<double>{1.0, 10.0, 50.0});
        seed = o.seed.value_or(sec.value("seed", std::uint64_t{0}));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config section 'verify': ") + e.what());
    }
    for (double t : thresholds)
        if (!(t > 0))
            throw ConfigError("thresholds must be positive");

    require_input(o.obs, "observation sequence");
    const auto files = member_files(o);
    const auto obs = read_sequence(o.obs);
    std::vector<RadarSequence> members;
    for (const auto& f : files)
        members.push_back(read_sequence(f));
    const int leads = members.front().length();
    for (const auto& m : members)
        if (m.length() != leads)
            throw ShapeMismatch("members differ in length");
    if (o.obs_offset < 0 || o.obs_offset + leads > obs.length())
        throw InvalidArgument("observation has " + std::to_string(obs.length()) + " frames; leads need frames " +
                              std::to_string(o.obs_offset) + ".." + std::to_string(o.obs_offset + leads - 1));

    RunRecorder rec("verify", o.out);
    rec.input(o.obs);
    for (const auto& f : files)
        rec.input(f);
    rec.config({{"verify", {{"thresholds_mmh", thresholds}, {"seed", seed}, {"obs_offset", o.obs_offset},
                            {"wet_only_rank_histogram", o.wet_only}}},
                {"preprocess", pre}});
    rec.seed(seed);

    const double wet_dbz = o.wet_only ? rainrate_to_dbz(0.1, pre) : -1.0;
    const int n = static_cast<int>(members.size());
    nlohmann::json per_lead = nlohmann::json::array();
    for (int l = 0; l < leads; ++l) {
        const auto& truth = obs.frames[static_cast<std::size_t>(o.obs_offset + l)];
        std::vector<ReflectivityField> ens;
        for (const auto& m : members) {
            require_same_shape(m.frames[static_cast<std::size_t>(l)], truth, "verify");
            ens.push_back(m.frames[static_cast<std::size_t>(l)]);
        }
        ReflectivityField mean(truth.height(), truth.width());
        mean.resolution_km = truth.resolution_km;
        for (const auto& f : ens)
            for (std::size_t i = 0; i < mean.size(); ++i)
                mean.values()[i] += f.values()[i] / static_cast<float>(n);

        nlohmann::json entry;
        entry["lead"] = l + 1;
        entry["lead_minutes"] = (l + 1) * obs.timestep_minutes;
        entry["crps"] = crps_field(ens, truth);
        if (o.obs_offset >= 1) {
            const std::vector<ReflectivityField> persist{obs.frames[static_cast<std::size_t>(o.obs_offset - 1)]};
            entry["crps_persistence"] = crps_field(persist, truth);
        }

        const auto cont = continuous_scores(truth, mean);
        entry["ensemble_mean"] = {{"mae", cont.mae}, {"mse", cont.mse}, {"ssim", cont.ssim}};
        const auto obs_rr = dbz_to_rainrate(truth, pre);
        const auto mean_rr = dbz_to_rainrate(mean, pre);
        nlohmann::json cats = nlohmann::json::array();
        for (const auto& c : categorical_scores(obs_rr, mean_rr, thresholds))
            cats.push_back({{"threshold_mmh", c.threshold_mmh},
                            {"csi", number(c.csi)},
                            {"bias", number(c.bias)},
                            {"no_events", c.no_events},
                            {"hits", c.table.hits},
                            {"misses", c.table.misses},
                            {"false_alarms", c.table.false_alarms}});
        entry["ensemble_mean"]["categorical"] = cats;
        entry["ensemble_mean"]["sal"] = sal_json(sal(obs_rr, mean_rr));

        nlohmann::json member_sal = nlohmann::json::array();
        for (const auto& f : ens)
            member_sal.push_back(sal_json(sal(obs_rr, dbz_to_rainrate(f, pre))));
        entry["member_sal"] = member_sal;

        std::vector<double> stacked;
        stacked.reserve(truth.size() * static_cast<std::size_t>(n));
        std::vector<double> truth_values(truth.values().begin(), truth.values().end());
        for (std::size_t i = 0; i < truth.size(); ++i)
            for (const auto& f : ens)
                stacked.push_back(f.values()[i]);
        const auto rh = rank_histogram(stacked, truth_values, n, derive_seed(seed, static_cast<std::uint64_t>(l)), wet_dbz);
        entry["rank_histogram"] = {{"counts", rh.counts}, {"kl_from_uniform", number(rh.kl_from_uniform)},
                                   {"samples", rh.n_samples}};

        if (truth.height() >= 4 && truth.width() >= 4) {
            const auto so = rapsd(truth);
            const auto sm = rapsd(mean);
            std::vector<double> member_power(so.power.size(), 0.0);
            for (const auto& f : ens) {
                const auto s = rapsd(f);
                for (std::size_t k = 0; k < member_power.size(); ++k)
                    member_power[k] += s.power[k] / n;
            }
            entry["rapsd"] = {{"wavelength_km", so.wavelength_km},
                              {"obs_power_db", so.power_db},
                              {"ensemble_mean_power_db", sm.power_db},
                              {"member_power_db", to_db(member_power)}};
        }
        per_lead.push_back(entry);
    }

    nlohmann::json report = {{"observation", o.obs},
                             {"obs_offset", o.obs_offset},
                             {"members", n},
                             {"timestep_minutes", obs.timestep_minutes},
                             {"units", {{"crps", "dBZ"}, {"continuous", "dBZ"}, {"categorical", "mm/h"}, {"sal", "mm/h"}}},
                             {"leads", per_lead}};
    const std::filesystem::path out(o.out);
    std::filesystem::create_directories(out);
    const auto report_path = out / "verify_report.json";
    std::ofstream(report_path) << report.dump(1) << '\n';
    rec.output(report_path);
    if (o.plots)
        for (const auto& f : plot_report(report_path.string(), o.out))
            rec.output(f);
    rec.finish();

    for (const auto& e : per_lead) {
        std::cout << "lead=" << e["lead"] << " crps=" << e["crps"];
        if (e.contains("crps_persistence"))
            std::cout << " crps_persistence=" << e["crps_persistence"];
        std::cout << " ssim=" << e["ensemble_mean"]["ssim"] << " rank_kl=" << e["rank_histogram"]["kl_from_uniform"]
                  << '\n';
    }
    return kOk;
}

std::vector<std::string> plot_report(const std::string& report_path, const std::string& out_dir)
{
    require_input(report_path, "verify report");
    nlohmann::json r;
    try {
        std::ifstream in(report_path);
        r = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(report_path + ": " + e.what());
    }
    const std::filesystem::path out(out_dir);
    std::vector<std::string> written;
    try {
        const auto& leads = r.at("leads");
        Series crps{"ensemble", {}, {}}, persist{"persistence", {}, {}};
        std::vector<Series> csi;
        for (const auto& e : leads) {
            const double minutes = e.at("lead_minutes").get<double>();
            crps.x.push_back(minutes);
            crps.y.push_back(value(e.at("crps")));
            if (e.contains("crps_persistence")) {
                persist.x.push_back(minutes);
                persist.y.push_back(value(e["crps_persistence"]));
            }
            const auto& cats = e.at("ensemble_mean").at("categorical");
            csi.resize(cats.size());
            for (std::size_t k = 0; k < cats.size(); ++k) {
                csi[k].label = "CSI >= " + cats[k].at("threshold_mmh").dump() + " mm/h";
                csi[k].x.push_back(minutes);
                csi[k].y.push_back(value(cats[k].at("csi")));
            }
        }
        std::vector<Series> crps_series{crps};
        if (!persist.x.empty())
            crps_series.push_back(persist);
        write_line_chart(out / "crps_vs_lead.svg", crps_series, {"CRPS vs lead time", "lead time (min)", "CRPS (dBZ)"});
        written.push_back((out / "crps_vs_lead.svg").string());
        write_line_chart(out / "csi_vs_lead.svg", csi, {"Ensemble-mean CSI", "lead time (min)", "CSI"});
        written.push_back((out / "csi_vs_lead.svg").string());

        std::vector<double> sx, sy, sl;
        for (const auto& e : leads) {
            const int lead = e.at("lead").get<int>();
            const auto counts = e.at("rank_histogram").at("counts").get<std::vector<double>>();
            double total = 0;
            for (double c : counts)
                total += c;
            std::vector<double> freq;
            for (double c : counts)
                freq.push_back(total > 0 ? c / total : 0.0);
            const auto rh = out / ("rank_histogram_lead" + std::to_string(lead) + ".svg");
            write_bar_chart(rh, freq,
                            {"Rank histogram, lead " + std::to_string(lead), "rank of observation", "relative frequency"},
                            counts.empty() ? -1.0 : 1.0 / counts.size());
            written.push_back(rh.string());

            if (e.contains("rapsd")) {
                const auto& s = e["rapsd"];
                const auto wl = s.at("wavelength_km").get<std::vector<double>>();
                std::vector<Series> spectra{
                    {"observation", wl, s.at("obs_power_db").get<std::vector<double>>()},
                    {"ensemble mean", wl, s.at("ensemble_mean_power_db").get<std::vector<double>>()},
                    {"members", wl, s.at("member_power_db").get<std::vector<double>>()}};
                const auto sp = out / ("rapsd_lead" + std::to_string(lead) + ".svg");
                write_line_chart(sp, spectra,
                                 {"RAPSD, lead " + std::to_string(lead), "wavelength (km)", "power (dB)", true, false});
                written.push_back(sp.string());
            }
            for (const auto& m : e.at("member_sal")) {
                sx.push_back(value(m.at("S")));
                sy.push_back(value(m.at("A")));
                sl.push_back(value(m.at("L")));
            }
        }
        write_scatter(out / "sal_scatter.svg", sx, sy, sl, 2.0, {"SAL of ensemble members (colour: L)", "S", "A"});
        written.push_back((out / "sal_scatter.svg").string());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(report_path + ": " + e.what());
    }
    return written;
}

int run_plot(const PlotOptions& o)
{
    if (o.report.empty() && o.fields.empty())
        throw InvalidArgument("nothing to plot: give --report and/or --field");
    RunRecorder rec("plot", o.out);
    std::vector<std::string> written;
    if (!o.report.empty()) {
        rec.input(o.report);
        written = plot_report(o.report, o.out);
    }
    for (const auto& f : o.fields) {
        require_input(f, "field file");
        rec.input(f);
        const auto seq = read_sequence(f);
        std::vector<std::string> captions;
        for (int t = 0; t < seq.length(); ++t)
            captions.push_back("t=" + std::to_string(t * seq.timestep_minutes) + " min");
        const auto path = std::filesystem::path(o.out) / (std::filesystem::path(f).stem().string() + ".svg");
        write_frames(path, seq.frames, captions, 0.0, 60.0);
        written.push_back(path.string());
    }
    for (const auto& w : written)
        rec.output(w);
    rec.finish();
    for (const auto& w : written)
        std::cout << w << '\n';
    return kOk;
}

}  // namespace radarcast::cli
