#include <doctest.h>

#include "despar/csv.hpp"
#include "despar/error.hpp"
#include "despar/report.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace despar;

namespace {

ErrorCode parse_error(const std::string& text, std::string* message = nullptr) {
  std::istringstream in(text);
  try {
    read_dataset_csv(in);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("parsed malformed input");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("dataset CSV") {
  std::istringstream in("\xEF\xBB\xBFy,a,b\r\n1,2,3\n\n4.5,-1e-3,+6\n7,8,9\n");
  const Dataset d = read_dataset_csv(in);
  CHECK(d.T() == 3);
  CHECK(d.N() == 2);
  CHECK(d.y()(1) == 4.5);
  CHECK(d.X()(1, 0) == -1e-3);
  CHECK(d.X()(1, 1) == 6.0);
  CHECK(d.name(1) == "b");
}

TEST_CASE("malformed dataset CSV") {
  std::string msg;
  CHECK(parse_error("1,2\n3,4\n", &msg) == ErrorCode::ParseError);
  CHECK(msg.find("header") != std::string::npos);
  CHECK(parse_error("y,x\n1,2\n3,abc\n", &msg) == ErrorCode::ParseError);
  CHECK(msg.find("line 3, column 2") != std::string::npos);
  CHECK(parse_error("y,x\n1,2,3\n", &msg) == ErrorCode::ParseError);
  CHECK(msg.find("line 2") != std::string::npos);
  CHECK(parse_error("y,x\n1,2\n1,2,\n") == ErrorCode::ParseError);
  CHECK(parse_error("y,x\n1,nan\n2,3\n") == ErrorCode::ParseError);
  CHECK(parse_error("") == ErrorCode::ParseError);
  CHECK(parse_error("y\n1\n2\n") == ErrorCode::ParseError);
  CHECK(parse_error("y,x\n") == ErrorCode::ParseError);
  CHECK(parse_error("y,x\n1,2\n") == ErrorCode::InvalidArgument);  // one row: T < 2
}

TEST_CASE("restriction CSV") {
  const std::vector<std::string> names{"a", "b"};
  const std::vector<Index> H{3, 7};
  std::istringstream in("b,a,q\n1,0,0.5\n1,-1,0\n");
  const Restriction r = read_restriction_csv(in, names, H);
  CHECK(r.H == H);
  CHECK(r.R(0, 1) == 1.0);
  CHECK(r.R(0, 0) == 0.0);
  CHECK(r.R(1, 0) == -1.0);
  CHECK(r.q(0) == 0.5);

  std::istringstream unknown("c,q\n1,0\n");
  try {
    read_restriction_csv(unknown, names, H);
    FAIL("expected UnknownColumn");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownColumn);
  }
  std::istringstream no_q("a,b\n1,0\n");
  CHECK_THROWS_AS(read_restriction_csv(no_q, names, H), Error);
}

TEST_CASE("number formatting round trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 12345678.9, 0.0})
    CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("tables") {
  std::vector<CoverageRow> cov{{"ardl-iid", 101, 100, "rho", 0.801, 0.212, 1000, 2}};
  std::vector<RejectionRow> rej{{"var-size", 102, 100, "size", 0.08, 1000, 0}};
  std::ostringstream out;
  write_table_csv(out, cov, rej);
  CHECK(out.str() ==
        "scenario,N,T,parameter/mode,value,width_or_blank,replications,excluded\n"
        "ardl-iid,101,100,rho,0.801,0.212,1000,2\n"
        "var-size,102,100,size,0.08,,1000,0\n");
  const Json j = table_json(cov, rej);
  REQUIRE(j["rows"].size() == 2);
  CHECK(j["rows"][0]["parameter/mode"] == "rho");
  CHECK(j["rows"][1]["width_or_blank"].is_null());
  auto it = j["rows"][0].begin();
  CHECK(it.key() == "scenario");
}

TEST_CASE("file digest") {
  const auto path = std::filesystem::temp_directory_path() / "despar_digest_test.txt";
  {
    std::ofstream f(path, std::ios::binary);
    f << "abc";
  }
  CHECK(sha256_file(path) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::filesystem::remove(path);
  CHECK_THROWS_AS(sha256_file(path), Error);
}

}
