#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "etml/parser.hpp"

namespace etml::testing {

inline std::string source_dir() { return ETML_SOURCE_DIR; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string corpus_path(const std::string& name) { return source_dir() + "/corpus/" + name; }

inline Program corpus_program(const std::string& name) {
    return parse_program(read_file(corpus_path(name + ".etml")));
}

// Names of corpus programs that are expected to run (no `error:` line).
inline std::vector<std::string> positive_corpus() {
    std::vector<std::string> out;
    for (auto& f : std::filesystem::directory_iterator(source_dir() + "/corpus")) {
        if (f.path().extension() != ".etml") continue;
        auto expect = f.path();
        expect.replace_extension(".expect");
        if (read_file(expect.string()).find("error:") != std::string::npos) continue;
        out.push_back(f.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Programs whose every declaration is at base.
inline std::vector<std::string> base_programs() {
    return {
        "let%base x = print 3\nlet%base return = x\n",
        "let%base id = fun x -> x\nlet%base twice = fun f -> fun x -> f (f x)\n"
        "let%base return = twice (fun y -> print (y * 2)) (id 5)\n",
        "let%base fact = fix (fun self -> fun n -> n * n)\nlet%base a = print (fact 4)\n"
        "let%base return = a - 1\n",
        "module%base M = struct\n  let%base a = print 2\n  let%base s = \"tier\"\nend\n"
        "let%base u = print M.s\nlet%base return = M.a * 5\n",
        "module%base F = functor (X : sig val%base n : int end) -> struct\n"
        "  let%base m = print (X.n + 1)\nend\n"
        "module%base A = struct let%base n = 4 end\nmodule%base B = F(A)\n"
        "module%base C = F(A)\nlet%base return = B.m + C.m\n",
    };
}

}  // namespace etml::testing
