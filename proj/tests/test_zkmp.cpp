#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "zkseries/zkmp.hpp"

using namespace zkseries;

namespace {

struct Instance {
    ZkmpStatement stmt;
    ZkmpWitness wit;
};

Instance make_instance(const CommitParams& params, ScalarRng& rng, const Scalar& x,
                       const Scalar& y) {
    Instance inst;
    inst.wit = {x, y, rng.next_scalar(), rng.next_scalar(), rng.next_scalar()};
    inst.stmt.c_x = commit(params, x, inst.wit.r_x);
    inst.stmt.c_y = commit(params, y, inst.wit.r_y);
    inst.stmt.c_xy = commit(params, sc_mul(x, y), inst.wit.r_xy);
    return inst;
}

}  // namespace

TEST_CASE("honest multiplication proof verifies (3*4=12)") {
    auto params = setup_params(kDefaultParamsSeed);
    ScalarRng rng;
    auto inst = make_instance(params, rng, Scalar::from_u64(3), Scalar::from_u64(4));
    Transcript tp("zkmp-test");
    auto proof = zkmp_prove(params, tp, inst.stmt, inst.wit, rng);
    Transcript tv("zkmp-test");
    CHECK(zkmp_verify(params, tv, inst.stmt, proof));
}

TEST_CASE("zero annihilator instance verifies") {
    auto params = setup_params(kDefaultParamsSeed);
    ScalarRng rng;
    auto inst = make_instance(params, rng, Scalar::zero(), rng.next_scalar());
    Transcript tp("zkmp-test");
    auto proof = zkmp_prove(params, tp, inst.stmt, inst.wit, rng);
    Transcript tv("zkmp-test");
    CHECK(zkmp_verify(params, tv, inst.stmt, proof));
}

TEST_CASE("prover refuses a statement the witness does not satisfy") {
    auto params = setup_params(kDefaultParamsSeed);
    ScalarRng rng;
    auto inst = make_instance(params, rng, Scalar::from_u64(3), Scalar::from_u64(4));
    // product commitment claims 13
    inst.stmt.c_xy = commit(params, Scalar::from_u64(13), inst.wit.r_xy);
    Transcript tp("zkmp-test");
    CHECK_THROWS_AS(zkmp_prove(params, tp, inst.stmt, inst.wit, rng), std::invalid_argument);
}

TEST_CASE("completeness over 1000 random instances") {
    auto params = setup_params(kDefaultParamsSeed);
    ScalarRng rng;
    int accepted = 0;
    for (int i = 0; i < 1000; ++i) {
        auto inst = make_instance(params, rng, rng.next_scalar(), rng.next_scalar());
        Transcript tp("zkmp-batch");
        auto proof = zkmp_prove(params, tp, inst.stmt, inst.wit, rng);
        Transcript tv("zkmp-batch");
        if (zkmp_verify(params, tv, inst.stmt, proof)) ++accepted;
    }
    CHECK(accepted == 1000);
}

TEST_CASE("single-field mutations are always rejected") {
    auto params = setup_params(kDefaultParamsSeed);
    ScalarRng rng;
    std::mt19937_64 mut(42);
    int rejected = 0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i) {
        auto inst = make_instance(params, rng, rng.next_scalar(), rng.next_scalar());
        Transcript tp("zkmp-fuzz");
        auto proof = zkmp_prove(params, tp, inst.stmt, inst.wit, rng);

        // perturb one field of the proof or statement
        int which = static_cast<int>(mut() % 9);
        auto bump_scalar = [&](Scalar& s) { s = sc_add(s, Scalar::one()); };
        auto bump_point = [&](Point& p) { p = pt_add(p, pt_base_mul(Scalar::one())); };
        switch (which) {
            case 0: bump_point(proof.t_x); break;
            case 1: bump_point(proof.t_y); break;
            case 2: bump_point(proof.t_z); break;
            case 3: bump_scalar(proof.z_x); break;
            case 4: bump_scalar(proof.z_y); break;
            case 5: bump_scalar(proof.s_x); break;
            case 6: bump_scalar(proof.s_y); break;
            case 7: bump_scalar(proof.s_z); break;
            case 8: bump_point(inst.stmt.c_xy); break;
        }
        Transcript tv("zkmp-fuzz");
        if (!zkmp_verify(params, tv, inst.stmt, proof)) ++rejected;
    }
    CHECK(rejected == trials);
}

TEST_CASE("proof replayed against a different statement fails") {
    auto params = setup_params(kDefaultParamsSeed);
    ScalarRng rng;
    auto inst1 = make_instance(params, rng, Scalar::from_u64(3), Scalar::from_u64(4));
    auto inst2 = make_instance(params, rng, Scalar::from_u64(3), Scalar::from_u64(4));
    Transcript tp("zkmp-replay");
    auto proof = zkmp_prove(params, tp, inst1.stmt, inst1.wit, rng);
    Transcript tv("zkmp-replay");
    CHECK_FALSE(zkmp_verify(params, tv, inst2.stmt, proof));
}

TEST_CASE("fresh randomness yields distinct announcements for one statement") {
    auto params = setup_params(kDefaultParamsSeed);
    ScalarRng rng;
    auto inst = make_instance(params, rng, Scalar::from_u64(9), Scalar::from_u64(11));
    Transcript t1("zkmp-zk"), t2("zkmp-zk");
    auto p1 = zkmp_prove(params, t1, inst.stmt, inst.wit, rng);
    auto p2 = zkmp_prove(params, t2, inst.stmt, inst.wit, rng);
    CHECK(p1.t_x != p2.t_x);
    CHECK(p1.t_y != p2.t_y);
    CHECK(p1.t_z != p2.t_z);
}

TEST_CASE("verification consumes the same transcript stream as proving") {
    auto params = setup_params(kDefaultParamsSeed);
    ScalarRng rng;
    // two proofs on one transcript must verify in order on one transcript
    auto i1 = make_instance(params, rng, Scalar::from_u64(2), Scalar::from_u64(5));
    auto i2 = make_instance(params, rng, Scalar::from_u64(6), Scalar::from_u64(7));
    Transcript tp("zkmp-seq");
    auto p1 = zkmp_prove(params, tp, i1.stmt, i1.wit, rng);
    auto p2 = zkmp_prove(params, tp, i2.stmt, i2.wit, rng);

    Transcript tv("zkmp-seq");
    CHECK(zkmp_verify(params, tv, i1.stmt, p1));
    CHECK(zkmp_verify(params, tv, i2.stmt, p2));

    // out of order fails
    Transcript tw("zkmp-seq");
    CHECK_FALSE(zkmp_verify(params, tw, i2.stmt, p2));
}
