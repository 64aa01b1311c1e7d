#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "bcrepair/faultloc.hpp"
#include "bcrepair/io.hpp"
#include "bcrepair/pipeline.hpp"

namespace {

using namespace bcrepair;

void print_instruction(const CodeBody& body, const Instruction& insn, const ConstantPool& pool) {
    std::printf("  %5u: %-16s", insn.orig_pc, std::string(opcode_name(insn.op)).c_str());
    const OpcodeInfo& info = opcode_info(insn.op);
    switch (info.operands) {
        case OperandKind::LocalU1:
        case OperandKind::Iinc:
            std::printf(" %u", insn.local);
            if (info.operands == OperandKind::Iinc) std::printf(" %+d", insn.imm);
            break;
        case OperandKind::Imm1:
        case OperandKind::Imm2:
        case OperandKind::NewArrayType:
            std::printf(" %d", insn.imm);
            break;
        case OperandKind::CpU1:
        case OperandKind::CpU2:
        case OperandKind::MultiANewArray:
        case OperandKind::InvokeInterface:
        case OperandKind::InvokeDynamic: {
            std::printf(" #%u", insn.cp_index);
            const CpEntry& e = pool.at(insn.cp_index);
            if (e.tag == CpTag::Class) {
                std::printf(" // %s", pool.class_name(insn.cp_index).c_str());
            } else if (e.tag == CpTag::Fieldref || e.tag == CpTag::Methodref ||
                       e.tag == CpTag::InterfaceMethodref) {
                const CpEntry& nat = pool.at(e.index2);
                std::printf(" // %s.%s:%s", pool.class_name(e.index1).c_str(),
                            pool.utf8(nat.index1).c_str(), pool.utf8(nat.index2).c_str());
            } else if (e.tag == CpTag::String) {
                std::printf(" // \"%s\"", pool.utf8(e.index1).c_str());
            }
            break;
        }
        case OperandKind::Branch2:
        case OperandKind::Branch4: {
            const Instruction* target = body.find(insn.target);
            std::printf(" -> %u", target ? target->orig_pc : insn.target);
            break;
        }
        case OperandKind::TableSwitch:
        case OperandKind::LookupSwitch: {
            const Instruction* d = body.find(insn.switch_op->default_target);
            std::printf(" default -> %u", d ? d->orig_pc : 0);
            for (const SwitchCase& c : insn.switch_op->cases) {
                const Instruction* t = body.find(c.target);
                std::printf(", %d -> %u", c.key, t ? t->orig_pc : 0);
            }
            break;
        }
        case OperandKind::None:
            break;
    }
    std::printf("\n");
}

int cmd_inspect(const std::string& path) {
    ClassFile cf = load_class_file(path);
    std::printf("class %s", cf.name().c_str());
    if (cf.super_class != 0) std::printf(" extends %s", cf.super_name().c_str());
    std::printf("  (version %u.%u)\n", cf.major_version, cf.minor_version);
    for (const MemberInfo& m : cf.methods) {
        std::printf("\nmethod %s%s\n", m.name.c_str(), m.descriptor.c_str());
        if (!m.code) {
            std::printf("  (no code)\n");
            continue;
        }
        CodeBody body = decode_code(*m.code, cf.pool);
        std::printf("  max_stack=%u max_locals=%u\n", m.code->max_stack, m.code->max_locals);
        for (const Instruction& insn : body.instructions) {
            print_instruction(body, insn, cf.pool);
        }
        if (body.has_line_table) {
            std::printf("  line table:\n");
            for (const LineEntry& e : body.line_table) {
                const Instruction* at = body.find(e.at);
                std::printf("    pc %u -> line %u\n", at ? at->orig_pc : 0, e.line);
            }
        }
    }
    return 0;
}

int cmd_fl(const RepairConfig& cfg) {
    ProgramModel program;
    program.load_dir(cfg.classes_dir);
    std::vector<SuspiciousLocation> sites;
    if (cfg.fl_mode == FlMode::Spectrum) {
        std::vector<TestTrace> traces = ingest_trace_dir(cfg.traces_dir);
        CoverageMatrix matrix = lift_to_lines(traces, program);
        for (const std::string& w : matrix.warnings) {
            std::fprintf(stderr, "warning: %s\n", w.c_str());
        }
        sites = rank_locations(matrix, program);
    } else {
        std::vector<std::string> entries;
        std::istringstream in(read_text_file(cfg.perfect_locations_file));
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line[0] != '#') entries.push_back(line);
        }
        sites = perfect_locations(entries, program);
    }
    for (const SuspiciousLocation& s : sites) {
        std::printf("%.6f %s:%u\n", s.score, s.location.class_name.c_str(), s.location.line);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Template-based vulnerability repair for JVM class files"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run the full repair pipeline");
    std::string run_config;
    std::string run_fl, run_out;
    double run_budget = 0;
    run->add_option("--config", run_config, "config file (key = value)")->required();
    run->add_option("--fl", run_fl, "override fl_mode: perfect|spectrum");
    run->add_option("--budget", run_budget, "override budget seconds");
    run->add_option("--out", run_out, "override output directory");

    auto* inspect = app.add_subcommand("inspect", "dump decoded instructions and line table");
    std::string inspect_path;
    inspect->add_option("class-file", inspect_path, "path to a .class file")->required();

    auto* fl = app.add_subcommand("fl", "fault localization only; print ranked locations");
    std::string fl_config;
    fl->add_option("--config", fl_config, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(inspect)) return cmd_inspect(inspect_path);
        if (app.got_subcommand(fl)) return cmd_fl(bcrepair::load_config(fl_config));

        bcrepair::RepairConfig cfg = bcrepair::load_config(run_config);
        if (!run_fl.empty()) {
            if (run_fl == "perfect") cfg.fl_mode = bcrepair::FlMode::Perfect;
            else if (run_fl == "spectrum") cfg.fl_mode = bcrepair::FlMode::Spectrum;
            else throw bcrepair::ConfigError("--fl", "expected perfect or spectrum");
        }
        if (run_budget > 0) cfg.budget_seconds = run_budget;
        if (!run_out.empty()) cfg.output_dir = run_out;
        bcrepair::validate_config(cfg);

        bcrepair::RunOutcome outcome = bcrepair::orchestrate_repair(cfg);
        if (!outcome.error.empty()) {
            std::fprintf(stderr, "error: %s\n", outcome.error.c_str());
        }
        std::printf("status: %s\n", outcome.status.c_str());
        return outcome.exit_code;
    } catch (const bcrepair::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
