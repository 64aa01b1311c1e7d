#include "bcrepair/donor.hpp"

#include "bcrepair/descriptor.hpp"

#include <random>
#include <set>

#include "doctest.h"
#include "support/fixtures.hpp"

using namespace bcrepair;

namespace {

ProgramModel corpus_program(std::initializer_list<const char*> names) {
    ProgramModel p;
    for (const char* n : names) p.add_class(testsupport::load_corpus(n), n);
    return p;
}

}  // namespace

TEST_CASE("locals come from LVT entries live and written at the site") {
    ProgramModel p = corpus_program({"Arith_v52.class"});
    MethodId id{"corpus/Arith", "calc", "(II)I"};
    const CodeBody* body = p.body(id);
    REQUIRE(body);
    // Site on the last line: a, b, r all live and written.
    Label site = offsets_for_line(*body, 14).front();
    DonorPool pool = collect_donors(p, id, site, {});
    REQUIRE(pool.locals.size() == 3);
    CHECK(pool.locals[0].slot == 0);
    CHECK(pool.locals[0].name == "a");
    CHECK(pool.locals[2].slot == 2);
    CHECK(pool.locals[2].name == "r");
    CHECK(pool.locals[2].descriptor == "I");

    // At the first line, r has not been written yet on any path.
    Label early = offsets_for_line(*body, 10).front();
    DonorPool pool2 = collect_donors(p, id, early, {});
    std::set<u2> slots;
    for (const LocalDonor& l : pool2.locals) slots.insert(l.slot);
    CHECK(slots == std::set<u2>{0, 1});
}

TEST_CASE("fields and literals are collected from the enclosing class") {
    ProgramModel p = corpus_program({"Fields_v52.class"});
    MethodId id{"corpus/Fields", "bump", "(I)I"};
    const CodeBody* body = p.body(id);
    Label site = offsets_for_line(*body, 101).front();
    DonorPool pool = collect_donors(p, id, site, {});
    bool has_count = false, has_seed = false, has_limit = false;
    for (const FieldDonor& f : pool.fields) {
        if (f.name == "count") {
            has_count = true;
            CHECK(f.staticness == Staticness::Instance);
        }
        if (f.name == "SEED") {
            has_seed = true;
            CHECK(f.staticness == Staticness::Static);
        }
        if (f.name == "LIMIT") has_limit = true;
    }
    CHECK(has_count);
    CHECK(has_seed);
    CHECK(has_limit);
}

TEST_CASE("string constants show up as literal donors") {
    ProgramModel p = corpus_program({"Arrays_v52.class"});
    MethodId id{"corpus/Arrays", "names", "()Ljava/lang/String;"};
    const CodeBody* body = p.body(id);
    Label site = offsets_for_line(*body, 141).front();
    DonorPool pool = collect_donors(p, id, site, {});
    const ClassFile* cf = p.find("corpus/Arrays");
    bool admin = false;
    for (const LiteralDonor& l : pool.literals) {
        if (l.tag != CpTag::String) continue;
        if (cf->pool.utf8(cf->pool.at(l.cp_index).index1) == "admin") admin = true;
    }
    CHECK(admin);
}

TEST_CASE("store-kind typing stands in for a missing LVT") {
    ProgramModel p = corpus_program({"NoLines_v52.class"});
    MethodId id{"corpus/NoLines", "quiet", "(II)I"};
    const CodeBody* body = p.body(id);
    DonorPool pool = collect_donors(p, id, body->instructions.back().label, {});
    REQUIRE(pool.locals.size() == 2);  // the two int parameters
    CHECK(pool.locals[0].descriptor == "I");
    CHECK(pool.locals[1].descriptor == "I");
}

TEST_CASE("descriptor compatibility") {
    ClassIndex index;
    CHECK(descriptor_compatible("I", "I", index));
    CHECK_FALSE(descriptor_compatible("I", "Ljava/lang/String;", index));
    CHECK(descriptor_compatible("B", "I", index));
    CHECK(descriptor_compatible("B", "S", index));
    CHECK(descriptor_compatible("S", "I", index));
    CHECK(descriptor_compatible("C", "I", index));
    CHECK_FALSE(descriptor_compatible("I", "B", index));
    CHECK_FALSE(descriptor_compatible("I", "J", index));
    CHECK_FALSE(descriptor_compatible("F", "D", index));
    CHECK_FALSE(descriptor_compatible("Z", "I", index));
    CHECK(descriptor_compatible("[I", "[I", index));
    CHECK_FALSE(descriptor_compatible("[I", "[J", index));
    CHECK_THROWS_AS(descriptor_compatible("garbage", "I", index), InvalidDescriptor);

    // Subclass facts come from the loaded classes.
    ClassFile parser = testsupport::load_corpus("Parser_v52.class");
    ClassFile secure = testsupport::load_corpus("SecureParser_v52.class");
    index.add(&parser);
    index.add(&secure);
    CHECK(descriptor_compatible("Lcorpus/SecureParser;", "Lcorpus/Parser;", index));
    CHECK_FALSE(descriptor_compatible("Lcorpus/Parser;", "Lcorpus/SecureParser;", index));
    CHECK(descriptor_compatible("Lcorpus/Parser;", "Ljava/lang/Object;", index));
}

TEST_CASE("secure-class inference") {
    ClassIndex index;
    ClassFile parser = testsupport::load_corpus("Parser_v52.class");
    ClassFile secure = testsupport::load_corpus("SecureParser_v52.class");
    ClassFile user = testsupport::load_corpus("ParserUser_v52.class");
    index.add(&parser);
    index.add(&secure);
    index.add(&user);
    std::vector<SecurePair> pairs = builtin_secure_pairs();
    CHECK(infer_secure_class(index, pairs, "java/util/Random") ==
          "java/security/SecureRandom");
    CHECK(infer_secure_class(index, pairs, "corpus/Parser") == "corpus/SecureParser");
    CHECK_FALSE(infer_secure_class(index, pairs, "corpus/ParserUser").has_value());
}

TEST_CASE("secure-pair table file") {
    std::string dir = testsupport::scratch_dir("pairs");
    write_text_file(dir + "/pairs.txt",
                    "# comment\n"
                    "com/x/Api com/x/SecureApi\n"
                    "\n"
                    "com/y/Channel com/y/SecureChannel\n");
    std::vector<SecurePair> pairs = load_secure_pairs(dir + "/pairs.txt");
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].cls == "com/x/Api");
    CHECK(pairs[1].secure == "com/y/SecureChannel");
}

TEST_CASE("donor pools are deterministic") {
    ProgramModel p = corpus_program({"Fields_v52.class"});
    MethodId id{"corpus/Fields", "bump", "(I)I"};
    const CodeBody* body = p.body(id);
    Label site = offsets_for_line(*body, 101).front();
    DonorPool a = collect_donors(p, id, site, {});
    DonorPool b = collect_donors(p, id, site, {});
    REQUIRE(a.locals.size() == b.locals.size());
    for (std::size_t i = 0; i < a.locals.size(); ++i) {
        CHECK(a.locals[i].slot == b.locals[i].slot);
    }
    REQUIRE(a.fields.size() == b.fields.size());
    for (std::size_t i = 0; i < a.fields.size(); ++i) {
        CHECK(a.fields[i].name == b.fields[i].name);
    }
    REQUIRE(a.literals.size() == b.literals.size());
}

TEST_CASE("liveness matches brute-force path enumeration on random bodies") {
    // Random acyclic programs: stores, forward branches, returns.
    std::mt19937 rng(20240101);
    for (int round = 0; round < 300; ++round) {
        std::uniform_int_distribution<int> len_dist(4, 14);
        int n = len_dist(rng);
        CodeBody body;
        body.max_locals = 4;
        struct Plan {
            enum Kind { Store, Branch, Nop } kind;
            int slot = 0;
            int target = 0;
        };
        std::vector<Plan> plan(static_cast<std::size_t>(n));
        for (int i = 0; i < n - 1; ++i) {
            int roll = static_cast<int>(rng() % 3);
            if (roll == 0) {
                plan[i] = {Plan::Store, static_cast<int>(rng() % 3) + 1, 0};
            } else if (roll == 1 && i + 2 < n) {
                std::uniform_int_distribution<int> t(i + 1, n - 1);
                plan[i] = {Plan::Branch, 0, t(rng)};
            } else {
                plan[i] = {Plan::Nop, 0, 0};
            }
        }
        plan[n - 1] = {Plan::Nop, 0, 0};
        for (int i = 0; i < n; ++i) {
            Instruction insn;
            if (plan[i].kind == Plan::Store) {
                body.instructions.push_back(make_insn(Op::iconst_0));
                body.instructions.back().label = body.next_label++;
                insn = make_store(Op::istore, static_cast<u2>(plan[i].slot));
            } else if (plan[i].kind == Plan::Branch) {
                insn = make_load(Op::iload, 0);
                insn.label = body.next_label++;
                body.instructions.push_back(insn);
                insn = make_insn(Op::ifeq);
            } else {
                insn = make_insn(i == n - 1 ? Op::return_ : Op::nop);
            }
            insn.label = body.next_label++;
            body.instructions.push_back(insn);
        }
        // Resolve branch targets to the first instruction of the planned slot.
        std::vector<std::size_t> starts;
        for (std::size_t i = 0; i < body.instructions.size(); ++i) {
            const Instruction& insn = body.instructions[i];
            if (insn.op == Op::iconst_0 || insn.op == Op::nop || insn.op == Op::return_ ||
                (insn.is_load() && body.instructions[i + 1].op == Op::ifeq)) {
                starts.push_back(i);
            }
        }
        std::size_t k = 0;
        std::vector<std::size_t> plan_start(plan.size());
        for (std::size_t i = 0; i < plan.size(); ++i) {
            plan_start[i] = starts[k];
            ++k;
        }
        for (std::size_t i = 0, pos = 0; i < plan.size(); ++i) {
            if (plan[i].kind == Plan::Branch) {
                std::size_t br = plan_start[i] + 1;
                body.instructions[br].target =
                    body.instructions[plan_start[static_cast<std::size_t>(plan[i].target)]]
                        .label;
            }
            (void)pos;
        }

        // Brute force: DFS over all paths from entry collecting writes.
        std::size_t site_plan = rng() % plan.size();
        std::size_t site_pos = plan_start[site_plan];
        Label site = body.instructions[site_pos].label;
        std::set<int> brute;
        struct Walker {
            const CodeBody& body;
            std::size_t site_pos;
            std::set<int>& out;
            void walk(std::size_t pos, std::set<int> written, int depth) {
                if (depth > 64) return;
                for (;;) {
                    if (pos == site_pos) {
                        for (int s : written) out.insert(s);
                        // Paths continue but the site was reached: done here.
                    }
                    const Instruction& insn = body.instructions[pos];
                    if (insn.op == Op::return_) return;
                    if (insn.is_store()) written.insert(insn.slot());
                    if (insn.op == Op::ifeq) {
                        std::size_t t = body.index_of(insn.target);
                        walk(t, written, depth + 1);
                    }
                    ++pos;
                    if (pos >= body.instructions.size()) return;
                }
            }
        };
        Walker{body, site_pos, brute}.walk(0, {0}, 0);  // slot 0 = the int parameter

        std::vector<bool> computed = written_before(body, "(I)V", true, site);
        for (int slot = 0; slot < 4; ++slot) {
            bool brute_has = brute.count(slot) != 0;
            bool engine_has = slot < static_cast<int>(computed.size()) && computed[slot];
            CAPTURE(round);
            CAPTURE(slot);
            CHECK(brute_has == engine_has);
        }
    }
}
