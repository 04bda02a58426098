#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "opda/zoo.hpp"

#ifndef OPDA_CLI_PATH
#define OPDA_CLI_PATH "opda"
#endif

namespace {

struct CliResult {
  int status = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  CliResult r;
  std::string cmd = std::string(OPDA_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int rc = pclose(p);
  r.status = WEXITSTATUS(rc);
  return r;
}

std::string zoo_path(const std::string& rel) {
  return (opda::zoo::machine_dir() / rel).string();
}

}  // namespace

TEST_CASE("decide prints true and exits cleanly") {
  auto r = run_cli("decide " + zoo_path("zoo/dup2.expr") + " 0101");
  CHECK(r.status == 0);
  CHECK(r.out == "true\n");
  auto r2 = run_cli("decide " + zoo_path("zoo/dup2.expr") + " 010");
  CHECK(r2.status == 0);
  CHECK(r2.out == "false\n");
}

TEST_CASE("parse failures exit with the parse code") {
  std::string bad = "/tmp/opda_broken_machine.m";
  {
    std::ofstream f(bad);
    f << "machine broken\nkind npda\ninput 0\nstack Z\nstart q0\naccept qf\n"
         "trans q0 0 -> q1\nend\n";
  }
  auto r = run_cli("parse " + bad);
  CHECK(r.status == 2);

  auto ok = run_cli("parse " + zoo_path("zoo/dyck1.m"));
  CHECK(ok.status == 0);
}

TEST_CASE("run reports verdicts and diagnostics") {
  auto r = run_cli("run " + zoo_path("samples/anbn.m") + " 0011");
  CHECK(r.status == 0);
  CHECK(r.out.find("accept\n") == 0);
  CHECK(r.out.find("paths:") != std::string::npos);

  auto rej = run_cli("run " + zoo_path("samples/anbn.m") + " 01110");
  CHECK(rej.status == 0);
  CHECK(rej.out.find("reject\n") == 0);
}

TEST_CASE("the table verb matches the documented seven rows") {
  auto r = run_cli("table " + zoo_path("zoo/dyck1.expr") + " --max-len 2");
  CHECK(r.status == 0);
  CHECK(r.out ==
        "string,member\n"
        ",true\n"
        "a1,false\n"
        "a1',false\n"
        "a1 a1,false\n"
        "a1 a1',true\n"
        "a1' a1,false\n"
        "a1' a1',false\n");
  auto again = run_cli("table " + zoo_path("zoo/dyck1.expr") + " --max-len 2");
  CHECK(again.out == r.out);
}

TEST_CASE("outputs lists valid query words") {
  auto r = run_cli("outputs " + zoo_path("zoo/dup2_red.m") + " 01");
  CHECK(r.status == 0);
  CHECK(r.out == "0~1\n10~\n~01\n");
}

TEST_CASE("prob prints the exact fraction") {
  auto r = run_cli("prob " + zoo_path("samples/coin.ppda") + " h");
  CHECK(r.status == 0);
  CHECK(r.out == "1/2\n");
}

TEST_CASE("resource bounds map to the resource exit code") {
  // With a tiny step budget the reducer cannot finish and the verdict is
  // resource-exceeded.
  auto r = run_cli("run " + zoo_path("zoo/dup2_red.m") +
                   " 0101 --max-steps 3");
  CHECK(r.status == 3);
  CHECK(r.out.find("resource-exceeded\n") == 0);
}

TEST_CASE("precondition failures map to their exit code") {
  // dyckify refuses reducers with mid-input lambda moves.
  auto r = run_cli("dyckify " + zoo_path("zoo/dup2_red.m") +
                   " --out-machine /tmp/opda_x.m --out-expr /tmp/opda_x.expr");
  CHECK(r.status == 4);
}

TEST_CASE("dyckify writes machine and oracle files that load back") {
  auto r = run_cli("dyckify " + zoo_path("samples/anbn.m") +
                   " --out-machine /tmp/opda_anbn_dyck.m"
                   " --out-expr /tmp/opda_anbn_dyck.expr");
  CHECK(r.status == 0);
  auto dec = run_cli("decide /tmp/opda_anbn_dyck.expr 0011");
  CHECK(dec.status == 0);
  CHECK(dec.out == "true\n");
  auto dec2 = run_cli("decide /tmp/opda_anbn_dyck.expr 001");
  CHECK(dec2.out == "false\n");
}

TEST_CASE("zoo crosscheck verb runs a small entry") {
  auto r = run_cli("zoo crosscheck dyck1 --max-len 4");
  CHECK(r.status == 0);
  CHECK(r.out.find("0 disagreements") != std::string::npos);
}

TEST_CASE("circuit build, dual, and eval round trip") {
  auto r = run_cli("circuit build 01 --chain " + zoo_path("samples/t_pass.m") +
                   " --out /tmp/opda_c.cir");
  CHECK(r.status == 0);
  std::string fin = "/tmp/opda_fin.expr";
  {
    std::ofstream f(fin);
    f << "(finite \"01\" \"0011\")\n";
  }
  auto ev = run_cli("circuit eval /tmp/opda_c.cir --oracle " + fin);
  CHECK(ev.status == 0);
  CHECK(ev.out == "true\n");
  auto du = run_cli("circuit dual /tmp/opda_c.cir --out /tmp/opda_d.cir");
  CHECK(du.status == 0);
  auto ev2 = run_cli("circuit eval /tmp/opda_d.cir --oracle " + fin);
  CHECK(ev2.out == "false\n");
}

TEST_CASE("transform verbs write loadable machines") {
  auto r = run_cli("transform star " + zoo_path("samples/zb01.m") +
                   " --out /tmp/opda_star.m");
  CHECK(r.status == 0);
  auto p = run_cli("parse /tmp/opda_star.m");
  CHECK(p.status == 0);
  auto run = run_cli("run /tmp/opda_star.m 0101");
  CHECK(run.out.find("accept\n") == 0);
  auto run2 = run_cli("run /tmp/opda_star.m 011");
  CHECK(run2.out.find("reject\n") == 0);
}

TEST_CASE("the environment variable overrides the bounds coefficient") {
  // With the default coefficient no path of this reducer hits a bound;
  // with a coefficient of one the longer split paths do, which shows in
  // the diagnostics line.
  auto run_env = [&](const std::string& prefix) {
    std::string cmd = prefix + OPDA_CLI_PATH + " run " +
                      zoo_path("zoo/dup2_red.m") + " 0101 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::string out;
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    pclose(p);
    return out;
  };
  std::string wide = run_env("");
  std::string tight = run_env("OPDA_MAX_STEPS=1 ");
  CHECK(wide.find("exceeded: 0") != std::string::npos);
  CHECK(tight.find("exceeded: 4") != std::string::npos);
}

TEST_CASE("the generated count-equality machine round trips through prob") {
  auto g = run_cli("equal6 --n 2 --out /tmp/opda_eq6.ppda");
  CHECK(g.status == 0);
  auto p1 = run_cli("prob /tmp/opda_eq6.ppda \"a1 a2 a3 a4 a5 a6\"");
  CHECK(p1.status == 0);
  CHECK(p1.out == "1\n");
  auto p2 = run_cli("prob /tmp/opda_eq6.ppda \"a1 a1 a1 a2 a3 a4 a5 a6\"");
  CHECK(p2.status == 0);
  CHECK(p2.out != "1\n");
}
