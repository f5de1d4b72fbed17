#include "zkseries/zkmp.hpp"

#include <stdexcept>

namespace zkseries {

namespace {

void absorb_statement(Transcript& tr, const ZkmpStatement& stmt) {
    tr.append_point("zkmp.c_x", stmt.c_x);
    tr.append_point("zkmp.c_y", stmt.c_y);
    tr.append_point("zkmp.c_xy", stmt.c_xy);
}

void absorb_announcements(Transcript& tr, const ZkmpProof& p) {
    tr.append_point("zkmp.t_x", p.t_x);
    tr.append_point("zkmp.t_y", p.t_y);
    tr.append_point("zkmp.t_z", p.t_z);
}

}  // namespace

ZkmpProof zkmp_prove(const CommitParams& params, Transcript& transcript,
                     const ZkmpStatement& stmt, const ZkmpWitness& wit, ScalarRng& rng) {
    if (commit(params, wit.x, wit.r_x) != stmt.c_x || commit(params, wit.y, wit.r_y) != stmt.c_y ||
        commit(params, sc_mul(wit.x, wit.y), wit.r_xy) != stmt.c_xy) {
        throw std::invalid_argument("zkmp_prove: witness inconsistent with statement");
    }

    Scalar b_x = rng.next_scalar(), b_y = rng.next_scalar();
    Scalar beta_x = rng.next_scalar(), beta_y = rng.next_scalar(), beta_z = rng.next_scalar();

    ZkmpProof p;
    p.t_x = commit(params, b_x, beta_x);
    p.t_y = commit(params, b_y, beta_y);
    p.t_z = pt_add(pt_mul(stmt.c_x, b_y), pt_mul(params.h, beta_z));

    absorb_statement(transcript, stmt);
    absorb_announcements(transcript, p);
    Scalar e = transcript.challenge_scalar("zkmp.e");

    p.z_x = sc_add(b_x, sc_mul(e, wit.x));
    p.z_y = sc_add(b_y, sc_mul(e, wit.y));
    p.s_x = sc_add(beta_x, sc_mul(e, wit.r_x));
    p.s_y = sc_add(beta_y, sc_mul(e, wit.r_y));
    // c_x^{z_y} h^{s_z} must equal t_z * c_xy^e, so the randomness response
    // folds out the y*r_x term picked up through the c_x base.
    p.s_z = sc_add(beta_z, sc_mul(e, sc_sub(wit.r_xy, sc_mul(wit.y, wit.r_x))));
    return p;
}

bool zkmp_verify(const CommitParams& params, Transcript& transcript, const ZkmpStatement& stmt,
                 const ZkmpProof& proof) {
    if (!stmt.c_x.is_valid() || !stmt.c_y.is_valid() || !stmt.c_xy.is_valid()) return false;
    if (!proof.t_x.is_valid() || !proof.t_y.is_valid() || !proof.t_z.is_valid()) return false;

    absorb_statement(transcript, stmt);
    absorb_announcements(transcript, proof);
    Scalar e = transcript.challenge_scalar("zkmp.e");

    if (commit(params, proof.z_x, proof.s_x) != pt_add(proof.t_x, pt_mul(stmt.c_x, e)))
        return false;
    if (commit(params, proof.z_y, proof.s_y) != pt_add(proof.t_y, pt_mul(stmt.c_y, e)))
        return false;
    Point lhs = pt_add(pt_mul(stmt.c_x, proof.z_y), pt_mul(params.h, proof.s_z));
    if (lhs != pt_add(proof.t_z, pt_mul(stmt.c_xy, e))) return false;
    return true;
}

}  // namespace zkseries
