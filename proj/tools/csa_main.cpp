// Command-line front end: ingestion, training, evaluation, the INP probe
// benchmark, attention-mask inspection and the gradient-check report.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "csa/ast.hpp"
#include "csa/gradcheck_suite.hpp"
#include "csa/inp.hpp"
#include "csa/metrics.hpp"
#include "csa/model.hpp"
#include "csa/parse.hpp"
#include "csa/pe.hpp"
#include "csa/relations.hpp"
#include "csa/sbm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace csa;

namespace {

uint64_t resolve_seed(uint64_t cli_seed, bool seed_given) {
    if (seed_given) return cli_seed;
    if (const char* env = std::getenv("CSA_SEED")) return std::strtoull(env, nullptr, 10);
    return 42;
}

void log_config(const std::string& command, const json& resolved) {
    std::cerr << "[" << command << "] config " << resolved.dump() << "\n";
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---- ingest ----

int cmd_ingest(const std::string& lang_name, const std::string& input, const std::string& out_path, int max_nodes,
               uint64_t seed) {
    ast::Lang lang = ast::lang_from_name(lang_name);
    log_config("ingest", {{"lang", lang_name}, {"input", input}, {"out", out_path}, {"max_nodes", max_nodes},
                          {"seed", seed}});
    std::vector<fs::path> files;
    fs::path in_path(input);
    if (fs::is_directory(in_path)) {
        std::string ext = lang == ast::Lang::python ? ".py" : ".java";
        for (const auto& entry : fs::recursive_directory_iterator(in_path))
            if (entry.is_regular_file() && entry.path().extension() == ext) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
    } else if (fs::exists(in_path)) {
        files.push_back(in_path);
    } else {
        throw DataError("input not found: " + input);
    }
    std::vector<ast::DatasetRecord> records;
    int failures = 0;
    for (const auto& file : files) {
        try {
            std::string code = read_file(file);
            ast::DatasetRecord rec;
            rec.ast = lang == ast::Lang::python ? ast::parse_python(code, file.filename().string())
                                                : ast::parse_java(code, file.filename().string());
            rec.ast = ast::truncate(ast::attach_subtokens(rec.ast), max_nodes);
            fs::path sidecar = file;
            sidecar.replace_extension(".summary");
            std::string summary;
            if (fs::exists(sidecar)) summary = read_file(sidecar);
            else if (lang == ast::Lang::python) summary = ast::python_docstring(code);
            rec.summary_tokens = ast::tokenize_summary(summary);
            if (static_cast<int>(rec.summary_tokens.size()) > 50) rec.summary_tokens.resize(50);
            records.push_back(std::move(rec));
        } catch (const DataError& e) {
            ++failures;
            std::cerr << "warning: skipping " << file.string() << ": " << e.what() << "\n";
        }
    }
    if (records.empty()) throw DataError("no parseable inputs");
    ast::save_jsonl(records, out_path);
    std::cerr << "ingested " << records.size() << " records";
    if (failures) std::cerr << " (" << failures << " skipped)";
    std::cerr << "\n";
    return 0;
}

// ---- train ----

struct SplitView {
    std::vector<ast::DatasetRecord> train, val;
};

SplitView validation_split(std::vector<ast::DatasetRecord> records, uint64_t seed) {
    std::vector<int> order(records.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng = derive_rng(seed, "val.split");
    for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    size_t val_count = std::max<size_t>(1, records.size() / 10);
    SplitView split;
    for (size_t i = 0; i < order.size(); ++i)
        (i < order.size() - val_count ? split.train : split.val).push_back(std::move(records[order[i]]));
    return split;
}

json eval_records(const model::Summarizer& model, const std::vector<ast::DatasetRecord>& records,
                  bool sentence_level) {
    if (records.empty()) throw EmptyCorpus("no records to evaluate");
    std::vector<metrics::EvalPair> pairs;
    for (const auto& rec : records) {
        metrics::EvalPair pair;
        pair.candidate = model.summarize(rec.ast);
        pair.reference = rec.summary_tokens;
        if (pair.reference.empty()) pair.reference = {"<empty>"};
        pairs.push_back(std::move(pair));
    }
    json out;
    out["bleu4"] = sentence_level ? metrics::bleu4_sentence_mean(pairs) : metrics::bleu4(pairs);
    out["rougeL"] = metrics::rouge_l(pairs);
    out["n_pairs"] = pairs.size();
    return out;
}

int cmd_train(const std::string& config_path, const std::string& preset, const std::string& data_path,
              const std::string& out_dir, long steps, const std::string& attention, int batch_size,
              const std::string& resume, long ckpt_every, uint64_t seed) {
    model::ModelConfig cfg = preset.empty() ? model::ModelConfig() : model::ModelConfig::preset(preset);
    if (!config_path.empty()) {
        json overlay = json::parse(read_file(config_path));
        if (!preset.empty()) overlay["preset"] = preset; // flags override file values
        cfg = model::ModelConfig::from_json(overlay.dump());
    }
    if (!attention.empty()) cfg.attention_mode = model::attention_mode_from_name(attention);
    log_config("train", {{"config", json::parse(cfg.to_json())}, {"data", data_path}, {"out", out_dir},
                         {"steps", steps}, {"batch", batch_size}, {"seed", seed}, {"resume", resume}});

    auto records = ast::load_jsonl(data_path);
    if (records.empty()) throw EmptyCorpus("empty dataset: " + data_path);
    SplitView split = validation_split(std::move(records), seed);

    fs::create_directories(out_dir);
    std::unique_ptr<model::Summarizer> net;
    model::TrainState state;
    if (!resume.empty()) {
        model::LoadedModel loaded = model::load_model(resume);
        net = std::move(loaded.model);
        state = std::move(loaded.state);
        std::cerr << "resumed from " << resume << " at step " << state.step << "\n";
    } else {
        ast::Vocabulary node_vocab = ast::build_vocab(split.train, ast::VocabSource::node_types, cfg.node_vocab_limit);
        ast::Vocabulary summary_vocab = ast::build_vocab(split.train, ast::VocabSource::summary, cfg.summary_vocab_limit);
        net = std::make_unique<model::Summarizer>(cfg, node_vocab, summary_vocab, seed);
        state.seed = seed;
        state.optimizer.lr = cfg.lr;
    }

    std::ofstream log(fs::path(out_dir) / "train_log.csv", state.step > 0 ? std::ios::app : std::ios::out);
    if (state.step == 0) log << "step,loss,sparsity_term,lr\n";

    auto batches = model::bucket_batches(split.train, batch_size, state.seed, 0);
    long epoch = -1;
    for (long step = state.step; step < steps; ++step) {
        long this_epoch = step / std::max<size_t>(1, batches.size());
        if (this_epoch != epoch) {
            epoch = this_epoch;
            batches = model::bucket_batches(split.train, batch_size, state.seed, epoch);
        }
        const auto& batch_idx = batches[step % batches.size()];
        std::vector<const ast::DatasetRecord*> batch;
        for (int i : batch_idx) batch.push_back(&split.train[i]);
        auto [loss, sparsity] = net->train_step(batch, state.optimizer, step, state.seed);
        state.step = step + 1;
        log << step << "," << loss << "," << sparsity << "," << state.optimizer.lr << "\n";
        if ((step + 1) % 50 == 0 || step + 1 == steps)
            std::cerr << "step " << step + 1 << "/" << steps << " loss " << loss << "\n";
        if (ckpt_every > 0 && (step + 1) % ckpt_every == 0)
            model::save_model(*net, state, (fs::path(out_dir) / ("ckpt_step" + std::to_string(step + 1) + ".bin")).string());
    }
    model::save_model(*net, state, (fs::path(out_dir) / "ckpt_final.bin").string());
    json metrics_json = eval_records(*net, split.val, false);
    std::ofstream(fs::path(out_dir) / "metrics.json") << metrics_json.dump(2) << "\n";
    std::cout << metrics_json.dump(2) << "\n";
    return 0;
}

// ---- eval ----

int cmd_eval(const std::string& ckpt, const std::string& data_path, bool sentence_level, uint64_t seed) {
    log_config("eval", {{"ckpt", ckpt}, {"data", data_path}, {"sentence_level", sentence_level}, {"seed", seed}});
    model::LoadedModel loaded = model::load_model(ckpt);
    auto records = ast::load_jsonl(data_path);
    if (records.empty()) throw EmptyCorpus("empty dataset: " + data_path);
    std::cout << eval_records(*loaded.model, records, sentence_level).dump(2) << "\n";
    return 0;
}

// ---- inp ----

int cmd_inp(int k, const std::string& scheme_name_arg, int runs, const std::string& data_path, int d_pe, int cap,
            int epochs, const std::string& out_path, uint64_t seed) {
    if (k != 1 && k != 3 && k != 5) throw UsageError("--k must be one of 1, 3, 5");
    inp::PeScheme scheme = inp::scheme_from_name(scheme_name_arg);
    log_config("inp", {{"k", k}, {"pe", scheme_name_arg}, {"runs", runs}, {"data", data_path}, {"d_pe", d_pe},
                       {"cap", cap}, {"epochs", epochs}, {"seed", seed}});
    auto corpus = ast::load_jsonl(data_path);
    std::vector<double> exact, per_position;
    for (int run = 0; run < runs; ++run) {
        inp::InpBuildConfig build_cfg;
        build_cfg.k = k;
        build_cfg.scheme = scheme;
        build_cfg.cap = cap;
        build_cfg.d_pe = d_pe;
        inp::InpDataset ds = inp::build_dataset(corpus, build_cfg, seed + run);
        inp::ProbeConfig probe_cfg;
        probe_cfg.epochs = epochs;
        inp::ProbeResult res = inp::train_probe(ds, probe_cfg, seed + run);
        exact.push_back(res.exact_acc);
        per_position.push_back(res.per_position_acc);
        std::cerr << "run " << run + 1 << "/" << runs << " exact " << res.exact_acc << " per-position "
                  << res.per_position_acc << "\n";
    }
    auto mean_of = [](const std::vector<double>& v) {
        double m = 0;
        for (double x : v) m += x;
        return m / v.size();
    };
    auto std_of = [&](const std::vector<double>& v) {
        double m = mean_of(v), s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return v.size() > 1 ? std::sqrt(s / (v.size() - 1)) : 0.0;
    };
    std::ostringstream csv;
    csv << "scheme,k,metric,mean_acc,std,runs\n";
    csv << scheme_name_arg << "," << k << ",exact," << mean_of(exact) << "," << std_of(exact) << "," << runs << "\n";
    csv << scheme_name_arg << "," << k << ",per_position," << mean_of(per_position) << "," << std_of(per_position)
        << "," << runs << "\n";
    std::cout << csv.str();
    if (!out_path.empty()) std::ofstream(out_path) << csv.str();
    return 0;
}

// ---- inspect ----

void write_ppm(const fs::path& path, const std::vector<double>& values, int n) {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n" << n << " " << n << "\n255\n";
    for (int i = 0; i < n * n; ++i) {
        double v = std::min(1.0, std::max(0.0, values[i]));
        unsigned char byte = static_cast<unsigned char>(std::lround(v * 255.0));
        out.put(byte).put(byte).put(byte);
    }
}

void write_matrix_csv(const fs::path& path, const std::vector<double>& values, int n) {
    std::ofstream out(path);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) out << (j ? "," : "") << values[static_cast<size_t>(i) * n + j];
        out << "\n";
    }
}

int cmd_inspect(const std::string& ckpt, const std::string& data_path, const std::string& record_id,
                const std::string& out_dir, uint64_t seed) {
    log_config("inspect", {{"ckpt", ckpt}, {"data", data_path}, {"record_id", record_id}, {"out_dir", out_dir},
                           {"seed", seed}});
    model::LoadedModel loaded = model::load_model(ckpt);
    auto records = ast::load_jsonl(data_path);
    const ast::DatasetRecord* record = nullptr;
    for (const auto& rec : records)
        if (rec.ast.origin_id == record_id) record = &rec;
    if (!record) throw DataError("record not found: " + record_id);
    fs::create_directories(out_dir);

    auto [ids, rel] = loaded.model->prepare_inputs(record->ast);
    const int n = record->ast.size();
    model::EncodeOptions opt;
    opt.capture = true;
    model::EncodeResult enc = loaded.model->encode(ids, rel, opt);

    std::vector<double> mask_sum(static_cast<size_t>(n) * n, 0.0);
    std::vector<double> attn_sum(static_cast<size_t>(n) * n, 0.0);
    long head_count = 0;
    json breakdown;
    breakdown["per_head"] = json::array();
    long agg_pairs = 0, agg_parent = 0, agg_sibling = 0, agg_neither = 0;
    for (size_t l = 0; l < enc.traces.size(); ++l) {
        for (size_t h = 0; h < enc.traces[l].size(); ++h) {
            const model::HeadTrace& trace = enc.traces[l][h];
            std::string tag = "l" + std::to_string(l) + "_h" + std::to_string(h);
            std::vector<double> mask_values(trace.mask.begin(), trace.mask.end());
            write_matrix_csv(fs::path(out_dir) / ("mask_" + tag + ".csv"), mask_values, n);
            write_matrix_csv(fs::path(out_dir) / ("scores_" + tag + ".csv"), trace.attn, n);
            if (!trace.link_prob.empty())
                write_matrix_csv(fs::path(out_dir) / ("link_prob_" + tag + ".csv"), trace.link_prob, n);
            for (int i = 0; i < n * n; ++i) {
                mask_sum[i] += trace.mask[i];
                attn_sum[i] += trace.attn[i];
            }
            ++head_count;
            try {
                sbm::RelationshipBreakdown bd = sbm::mask_relationship_breakdown(trace.mask, rel);
                breakdown["per_head"].push_back({{"layer", l},
                                                 {"head", h},
                                                 {"parent_child_pct", bd.parent_child_pct},
                                                 {"sibling_pct", bd.sibling_pct},
                                                 {"neither_pct", bd.neither_pct},
                                                 {"unmasked_pairs", bd.unmasked_pairs}});
                long total = bd.unmasked_pairs;
                agg_pairs += total;
                agg_parent += std::lround(bd.parent_child_pct * total);
                agg_sibling += std::lround(bd.sibling_pct * total);
                agg_neither += std::lround(bd.neither_pct * total);
            } catch (const EmptyMask&) {
                breakdown["per_head"].push_back({{"layer", l}, {"head", h}, {"empty", true}});
            }
        }
    }
    for (int i = 0; i < n * n; ++i) {
        mask_sum[i] /= head_count;
        attn_sum[i] /= head_count;
    }
    // normalize scores into [0,1] for the heatmap
    double attn_max = 1e-12;
    for (double v : attn_sum) attn_max = std::max(attn_max, v);
    std::vector<double> attn_norm(attn_sum);
    for (double& v : attn_norm) v /= attn_max;
    write_ppm(fs::path(out_dir) / "mask_aggregate.ppm", mask_sum, n);
    write_ppm(fs::path(out_dir) / "scores_aggregate.ppm", attn_norm, n);
    if (agg_pairs > 0) {
        breakdown["aggregate"] = {{"parent_child_pct", static_cast<double>(agg_parent) / agg_pairs},
                                  {"sibling_pct", static_cast<double>(agg_sibling) / agg_pairs},
                                  {"neither_pct", static_cast<double>(agg_neither) / agg_pairs},
                                  {"unmasked_pairs", agg_pairs}};
    }
    breakdown["n"] = n;
    breakdown["attention_mode"] = model::attention_mode_name(loaded.model->config().attention_mode);
    std::ofstream(fs::path(out_dir) / "breakdown.json") << breakdown.dump(2) << "\n";
    std::cout << breakdown.dump(2) << "\n";
    return 0;
}

// ---- gradcheck ----

int cmd_gradcheck(uint64_t seed) {
    log_config("gradcheck", {{"seed", seed}});
    auto rows = ad::run_gradcheck_suite(seed);
    bool all_pass = true;
    std::cout << "op,max_rel_err,status\n";
    for (const auto& row : rows) {
        all_pass = all_pass && row.pass;
        const char* status = row.pass ? (row.name == "negative_control" ? "detected" : "pass") : "FAIL";
        std::cout << row.name << "," << row.max_rel_err << "," << status << "\n";
    }
    if (!all_pass) throw NumericError("gradient check failed");
    return 0;
}

// ---- pe dump / relations dump ----

int cmd_pe_dump(const std::string& scheme_name_arg, const std::string& data_path, int index, int d_pe,
                const std::string& out_path, uint64_t seed) {
    inp::PeScheme scheme = inp::scheme_from_name(scheme_name_arg);
    log_config("pe dump", {{"scheme", scheme_name_arg}, {"data", data_path}, {"index", index}, {"d_pe", d_pe},
                           {"out", out_path}, {"seed", seed}});
    auto corpus = ast::load_jsonl(data_path);
    if (index < 0 || index >= static_cast<int>(corpus.size())) throw DataError("record index out of range");
    const ast::Ast& tree = corpus[index].ast;
    const int n = tree.size();
    std::vector<double> enc;
    int dim = d_pe;
    switch (scheme) {
        case inp::PeScheme::sequential:
            enc = pe::sequential_pe(n, d_pe);
            break;
        case inp::PeScheme::tree: {
            pe::TreePeConfig cfg;
            cfg.d_pe = d_pe;
            enc = pe::TreePe(cfg, seed).compute(tree);
            break;
        }
        case inp::PeScheme::triplet: {
            pe::TripletPe tp(d_pe, seed);
            std::vector<const ast::Ast*> all;
            for (const auto& rec : corpus) all.push_back(&rec.ast);
            tp.fit(all);
            enc = tp.compute(tree);
            break;
        }
        case inp::PeScheme::laplacian:
            dim = std::min(d_pe, 16);
            enc = pe::laplacian_pe(tree, dim);
            break;
        case inp::PeScheme::csa: {
            auto corpus_vocab = ast::build_vocab(corpus, ast::VocabSource::node_types, 1 << 20);
            nn::ParamStore store;
            pe::CseConfig cfg;
            cfg.d_pe = d_pe;
            cfg.layers = 2;
            cfg.heads = d_pe % 4 == 0 ? 4 : 2;
            Rng rng = derive_rng(seed, "pe.dump");
            pe::Cse cse(store, "cse", corpus_vocab.size(), cfg, rng);
            enc = cse.forward(ast::encode_node_types(tree, corpus_vocab), rel::compute(tree, cfg.p_max)).value();
            break;
        }
    }
    std::ostringstream csv;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j) csv << (j ? "," : "") << enc[static_cast<size_t>(i) * dim + j];
        csv << "\n";
    }
    if (out_path.empty()) std::cout << csv.str();
    else std::ofstream(out_path) << csv.str();
    return 0;
}

int cmd_relations_dump(const std::string& data_path, int index, const std::string& out_path, int p_max) {
    log_config("relations dump", {{"data", data_path}, {"index", index}, {"out", out_path}, {"p_max", p_max}});
    auto corpus = ast::load_jsonl(data_path);
    if (index < 0 || index >= static_cast<int>(corpus.size())) throw DataError("record index out of range");
    std::string csv = rel::to_csv(rel::compute(corpus[index].ast, p_max));
    if (out_path.empty()) std::cout << csv;
    else std::ofstream(out_path) << csv;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"code-structure-aware summarizer toolkit"};
    app.require_subcommand(1);

    uint64_t seed = 42;
    bool seed_given = false;
    app.add_flag_callback("--version", [] { std::cout << "csa 1.0\n"; std::exit(0); });

    // ingest
    auto* ingest = app.add_subcommand("ingest", "parse source files into a jsonl dataset");
    std::string ingest_lang = "python", ingest_input, ingest_out = "dataset.jsonl";
    int ingest_max_nodes = 150;
    ingest->add_option("--lang", ingest_lang)->check(CLI::IsMember({"python", "java"}));
    ingest->add_option("--input", ingest_input)->required();
    ingest->add_option("--out", ingest_out);
    ingest->add_option("--max-nodes", ingest_max_nodes);

    // train
    auto* train = app.add_subcommand("train", "train the summarizer");
    std::string train_config, train_preset, train_data, train_out = "run", train_attention, train_resume;
    long train_steps = 500, train_ckpt_every = 0;
    int train_batch = 8;
    train->add_option("--config", train_config);
    train->add_option("--preset", train_preset)->check(CLI::IsMember({"python", "java"}));
    train->add_option("--data", train_data)->required();
    train->add_option("--out", train_out);
    train->add_option("--steps", train_steps);
    train->add_option("--attention", train_attention)->check(CLI::IsMember({"sbm", "vanilla"}));
    train->add_option("--batch", train_batch);
    train->add_option("--resume", train_resume);
    train->add_option("--ckpt-every", train_ckpt_every);

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint with greedy decoding");
    std::string eval_ckpt, eval_data;
    bool eval_sentence = false;
    eval->add_option("--ckpt", eval_ckpt)->required();
    eval->add_option("--data", eval_data)->required();
    eval->add_flag("--sentence-level", eval_sentence, "average per-sentence BLEU instead of corpus BLEU");

    // inp
    auto* inp_cmd = app.add_subcommand("inp", "intermediate-node-prediction probe benchmark");
    int inp_k = 1, inp_runs = 10, inp_dpe = 64, inp_cap = 10, inp_epochs = 30;
    std::string inp_scheme = "csa", inp_data, inp_out;
    inp_cmd->add_option("--k", inp_k);
    inp_cmd->add_option("--pe", inp_scheme)
        ->check(CLI::IsMember({"csa", "sequential", "tree", "triplet", "laplacian"}));
    inp_cmd->add_option("--runs", inp_runs);
    inp_cmd->add_option("--data", inp_data)->required();
    inp_cmd->add_option("--d-pe", inp_dpe);
    inp_cmd->add_option("--cap", inp_cap);
    inp_cmd->add_option("--epochs", inp_epochs);
    inp_cmd->add_option("--out", inp_out);

    // inspect
    auto* inspect = app.add_subcommand("inspect", "dump attention masks, scores and relationship breakdown");
    std::string inspect_ckpt, inspect_data, inspect_record, inspect_out = "inspect_out";
    inspect->add_option("--ckpt", inspect_ckpt)->required();
    inspect->add_option("--data", inspect_data)->required();
    inspect->add_option("--record-id", inspect_record)->required();
    inspect->add_option("--out-dir", inspect_out);

    // gradcheck
    auto* gradcheck_cmd = app.add_subcommand("gradcheck", "finite-difference report for every op");

    // pe dump
    auto* pe_cmd = app.add_subcommand("pe", "positional encoding utilities");
    auto* pe_dump = pe_cmd->add_subcommand("dump", "emit a PE matrix as CSV");
    std::string pedump_scheme = "csa", pedump_data, pedump_out;
    int pedump_index = 0, pedump_dpe = 64;
    pe_dump->add_option("--scheme", pedump_scheme)
        ->check(CLI::IsMember({"csa", "sequential", "tree", "triplet", "laplacian"}));
    pe_dump->add_option("--data", pedump_data)->required();
    pe_dump->add_option("--index", pedump_index);
    pe_dump->add_option("--d-pe", pedump_dpe);
    pe_dump->add_option("--out", pedump_out);

    // relations dump
    auto* rel_cmd = app.add_subcommand("relations", "relation matrix utilities");
    auto* rel_dump = rel_cmd->add_subcommand("dump", "emit P/S distances as CSV");
    std::string reldump_data, reldump_out;
    int reldump_index = 0, reldump_pmax = 150;
    rel_dump->add_option("--data", reldump_data)->required();
    rel_dump->add_option("--index", reldump_index);
    rel_dump->add_option("--out", reldump_out);
    rel_dump->add_option("--p-max", reldump_pmax);

    for (auto* cmd : {ingest, train, eval, inp_cmd, inspect, gradcheck_cmd})
        cmd->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
    pe_dump->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });

    CLI11_PARSE(app, argc, argv);
    try {
        uint64_t run_seed = resolve_seed(seed, seed_given);
        if (*ingest) return cmd_ingest(ingest_lang, ingest_input, ingest_out, ingest_max_nodes, run_seed);
        if (*train)
            return cmd_train(train_config, train_preset, train_data, train_out, train_steps, train_attention,
                             train_batch, train_resume, train_ckpt_every, run_seed);
        if (*eval) return cmd_eval(eval_ckpt, eval_data, eval_sentence, run_seed);
        if (*inp_cmd)
            return cmd_inp(inp_k, inp_scheme, inp_runs, inp_data, inp_dpe, inp_cap, inp_epochs, inp_out, run_seed);
        if (*inspect) return cmd_inspect(inspect_ckpt, inspect_data, inspect_record, inspect_out, run_seed);
        if (*gradcheck_cmd) return cmd_gradcheck(run_seed);
        if (*pe_cmd && *pe_dump)
            return cmd_pe_dump(pedump_scheme, pedump_data, pedump_index, pedump_dpe, pedump_out, run_seed);
        if (*rel_cmd && *rel_dump) return cmd_relations_dump(reldump_data, reldump_index, reldump_out, reldump_pmax);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
