// etml: command-line driver for the tierless calculus toolchain.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "etml/harness.hpp"
#include "etml/parser.hpp"
#include "etml/pretty.hpp"
#include "etml/typecheck.hpp"

using namespace etml;
namespace fs = std::filesystem;

namespace {

constexpr int kUsage = 64;
constexpr int kTypeError = 3;
constexpr int kSliceError = 4;
constexpr int kRuntimeError = 5;

bool from_stdin = false;

std::string slurp(const std::string& path) {
    std::stringstream ss;
    if (path == "-" || (from_stdin && path.empty())) {
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string result_text(const ValuePtr& v, const Trace& t) {
    return "value: " + (v ? show_value(v) : std::string("<none>")) + "\ntrace: " + render_trace(t) + "\n";
}

void write_trace_file(const std::string& path, const Trace& t) {
    if (path.empty()) return;
    std::string s;
    for (auto& v : t) s += show_value(v) + "\n";
    spit(path, s);
}

// Maps pipeline exceptions to exit codes.
int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return kTypeError;
    } catch (const TypeError& e) {
        std::cerr << e.what() << "\n";
        return kTypeError;
    } catch (const SliceError& e) {
        std::cerr << e.what() << "\n";
        return kSliceError;
    } catch (const RuntimeError& e) {
        std::cerr << "RuntimeError " << to_string(e.kind) << ": " << e.what() << "\n";
        return kRuntimeError;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"etml: typecheck, interpret, slice and run tierless programs"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string file, outdir, side, trace_file, dir, summary, server_file, client_file;
    int seed = 0;
    app.add_option("--seed", seed, "Reserved");
    app.add_flag("--stdin", from_stdin, "Read the program from standard input");

    auto* check = app.add_subcommand("check", "Typecheck a program and print its signature");
    check->add_option("file", file, "Program file, or - for standard input");

    auto* interp = app.add_subcommand("interp", "Run a program under the interpreted semantics");
    interp->add_option("file", file, "Program file, or - for standard input");
    interp->add_option("--trace-file", trace_file);

    auto* slice_cmd = app.add_subcommand("slice", "Compile a program into server and client programs");
    slice_cmd->add_option("file", file, "Program file, or - for standard input");
    slice_cmd->add_option("-o,--output", outdir, "Output directory");
    slice_cmd->add_option("--side", side, "Print one side to stdout")->check(CLI::IsMember({"server", "client"}));

    auto* run = app.add_subcommand("run", "Compile a program and run the two halves");
    run->add_option("file", file);
    run->add_option("--server", server_file, "Run a given server program instead");
    run->add_option("--client", client_file, "Run a given client program instead");
    run->add_option("--trace-file", trace_file);

    auto* diff = app.add_subcommand("diff", "Compare interpreted and compiled runs");
    diff->add_option("file", file, "Program file, or - for standard input");

    auto* corpus = app.add_subcommand("corpus", "Run every program of a corpus directory");
    corpus->add_option("dir", dir)->required();
    corpus->add_option("--summary", summary, "Write a JSON summary here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return e.get_exit_code() == 0 ? code : kUsage;
    }

    if (*check)
        return guarded([&] {
            auto p = parse_program(slurp(file));
            auto t = type_program(p);
            std::cout << pretty(t.sig) << "\n";
            if (!t.runnable) std::cout << "(no client return binding)\n";
            return 0;
        });

    if (*interp)
        return guarded([&] {
            auto p = parse_program(slurp(file));
            type_program(p);
            auto r = run_program(p);
            std::cout << result_text(r.value, r.trace());
            write_trace_file(trace_file, r.trace());
            return 0;
        });

    if (*slice_cmd)
        return guarded([&] {
            if (outdir.empty() && side.empty()) throw CLI::ValidationError("slice needs -o <dir> or --side");
            auto p = parse_program(slurp(file));
            type_program(p);
            auto hoisted = hoist(annotate(p));
            auto sliced = compile(p);
            if (side == "server") std::cout << pretty(sliced.server, PrintMode::Target);
            if (side == "client") std::cout << pretty(sliced.client, PrintMode::Target);
            if (!outdir.empty()) {
                fs::create_directories(outdir);
                auto stem = file.empty() || file == "-" ? std::string("program") : fs::path(file).stem().string();
                auto base = fs::path(outdir) / stem;
                spit(base.string() + ".server.tgt", pretty(sliced.server, PrintMode::Target));
                spit(base.string() + ".client.tgt", pretty(sliced.client, PrintMode::Target));
                // The server half runs here; its queue and injections are what the client consumes.
                auto srv = run_server_target(sliced.server);
                spit(base.string() + ".queue", write_queue(srv.queue));
                spit(base.string() + ".inj", write_injections(srv.iota));
                spit(base.string() + ".hoisted.etml", pretty(hoisted));
                nlohmann::json tables;
                for (auto& [site, slot] : sliced.slot_table) tables["slots"][site] = slot.str();
                for (auto& [f, esc] : sliced.frag_table) {
                    auto& arr = tables["fragments"][f];
                    arr = nlohmann::json::array();
                    for (auto& e : esc) arr.push_back({{"converter", e.converter}, {"target", pretty(e.target)}});
                }
                spit(base.string() + ".refs.json", tables.dump(2) + "\n");
            }
            return 0;
        });

    if (*run)
        return guarded([&] {
            CompiledRun r;
            if (!server_file.empty() || !client_file.empty()) {
                if (server_file.empty() || client_file.empty())
                    throw std::runtime_error("--server and --client go together");
                auto s = parse_target_program(slurp(server_file));
                auto c = parse_target_program(slurp(client_file));
                typecheck_target(s, Side::Server);
                typecheck_target(c, Side::Client);
                r = run_pair(s, c);
            } else {
                if (file.empty() && !from_stdin) throw std::runtime_error("run needs a program or --server/--client");
                auto p = parse_program(slurp(file));
                type_program(p);
                r = run_compiled(p);
            }
            std::cout << result_text(r.value, r.trace());
            write_trace_file(trace_file, r.trace());
            return 0;
        });

    if (*diff)
        return guarded([&] {
            auto p = parse_program(slurp(file));
            type_program(p);
            auto rep = check_equivalence(p, fs::path(file).stem().string());
            std::cout << "interp value:   " << rep.interp_value << "\n"
                      << "compiled value: " << rep.compiled_value << "\n"
                      << "interp trace:   " << rep.interp_trace << "\n"
                      << "server trace:   " << rep.server_trace << "\n"
                      << "client trace:   " << rep.client_trace << "\n"
                      << "value match:    " << (rep.value_match ? "yes" : "no") << "\n"
                      << "trace match:    " << (rep.trace_match ? "yes" : "no") << "\n"
                      << "typing:         " << (rep.typing_preserved ? "preserved" : "broken") << "\n";
            if (!rep.detail.empty()) std::cout << "detail: " << rep.detail << "\n";
            return rep.ok() ? 0 : 1;
        });

    if (*corpus) {
        try {
            auto entries = load_corpus(dir);
            auto results = run_corpus(entries);
            int failed = 0;
            nlohmann::json js = nlohmann::json::array();
            for (auto& r : results) {
                std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
                failed += r.passed ? 0 : 1;
                js.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
            }
            std::cout << results.size() << " run, " << results.size() - failed << " passed, " << failed
                      << " failed\n";
            if (!summary.empty()) spit(summary, js.dump(2) + "\n");
            return failed ? 1 : 0;
        } catch (const std::exception& e) {
            std::cerr << e.what() << "\n";
            return 2;
        }
    }
    return kUsage;
}
