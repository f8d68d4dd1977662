// SPDX-License-Identifier: Apache-2.0
//! The FIFO test design (6 bits wide, 32 entries) with its self-checking
//! testbench, two faulty revisions for feedback-loop tests, and recorded
//! tool output for the parsers.

/// Synchronous FIFO with full/empty flags; writes while full and reads
/// while empty are dropped.
pub const FIFO_V: &str = r#"// 6-bit wide, 32-entry synchronous FIFO.
module fifo #(
    parameter WIDTH = 6,
    parameter DEPTH = 32
) (
    input  wire             clk,
    input  wire             rst,
    input  wire             wr_en,
    input  wire             rd_en,
    input  wire [WIDTH-1:0] din,
    output reg  [WIDTH-1:0] dout,
    output wire             full,
    output wire             empty
);
    localparam AW = $clog2(DEPTH);

    reg [WIDTH-1:0] mem [0:DEPTH-1];
    reg [AW-1:0] wr_ptr;
    reg [AW-1:0] rd_ptr;
    reg [AW:0] count;

    assign full = (count == DEPTH);
    assign empty = (count == 0);

    wire do_wr = wr_en && !full;
    wire do_rd = rd_en && !empty;

    always @(posedge clk) begin
        if (rst) begin
            wr_ptr <= 0;
            rd_ptr <= 0;
            count <= 0;
            dout <= 0;
        end else begin
            if (do_wr) begin
                mem[wr_ptr] <= din;
                wr_ptr <= wr_ptr + 1'b1;
            end
            if (do_rd) begin
                dout <= mem[rd_ptr];
                rd_ptr <= rd_ptr + 1'b1;
            end
            case ({do_wr, do_rd})
                2'b10: count <= count + 1'b1;
                2'b01: count <= count - 1'b1;
                default: count <= count;
            endcase
        end
    end
endmodule
"#;

/// Write-then-read pattern with overflow and underflow probes. Prints
/// `TEST PASS` or one `TEST FAIL: <msg>` line per detected fault.
pub const FIFO_TB_V: &str = r#"`timescale 1ns/1ps
module fifo_tb;
    localparam WIDTH = 6;
    localparam DEPTH = 32;

    reg clk = 1'b0;
    reg rst = 1'b1;
    reg wr_en = 1'b0;
    reg rd_en = 1'b0;
    reg [WIDTH-1:0] din = 0;
    wire [WIDTH-1:0] dout;
    wire full;
    wire empty;

    integer i;
    integer errors = 0;
    integer early_full = 0;
    integer mismatches = 0;

    fifo #(.WIDTH(WIDTH), .DEPTH(DEPTH)) dut (
        .clk(clk), .rst(rst), .wr_en(wr_en), .rd_en(rd_en),
        .din(din), .dout(dout), .full(full), .empty(empty)
    );

    always #5 clk = ~clk;

    // drive one time unit after the edge, sample before the next edge
    task tick;
        begin
            @(posedge clk);
            #1;
        end
    endtask

    initial begin
        tick;
        tick;
        rst = 1'b0;
        tick;
        if (!empty || full) begin
            $display("TEST FAIL: reset flags");
            errors = errors + 1;
        end

        for (i = 0; i < DEPTH; i = i + 1) begin
            if (full && early_full == 0) begin
                $display("TEST FAIL: full asserted early");
                errors = errors + 1;
                early_full = 1;
            end
            wr_en = 1'b1;
            din = (i * 7 + 3) % 64;
            tick;
        end
        wr_en = 1'b0;
        if (!full) begin
            $display("TEST FAIL: full not asserted");
            errors = errors + 1;
        end

        // a write while full must be dropped
        wr_en = 1'b1;
        din = 6'h3f;
        tick;
        wr_en = 1'b0;
        if (!full) begin
            $display("TEST FAIL: overflow");
            errors = errors + 1;
        end

        for (i = 0; i < DEPTH; i = i + 1) begin
            rd_en = 1'b1;
            tick;
            if (dout !== (i * 7 + 3) % 64 && mismatches == 0) begin
                $display("TEST FAIL: data mismatch at entry %0d", i);
                errors = errors + 1;
                mismatches = 1;
            end
        end
        rd_en = 1'b0;
        if (!empty) begin
            $display("TEST FAIL: empty not asserted");
            errors = errors + 1;
        end

        // a read while empty must be ignored
        rd_en = 1'b1;
        tick;
        rd_en = 1'b0;
        if (!empty || full) begin
            $display("TEST FAIL: underflow");
            errors = errors + 1;
        end
        wr_en = 1'b1;
        din = 6'h2a;
        tick;
        wr_en = 1'b0;
        rd_en = 1'b1;
        tick;
        rd_en = 1'b0;
        if (dout !== 6'h2a || !empty) begin
            $display("TEST FAIL: round trip after underflow");
            errors = errors + 1;
        end

        if (errors == 0) $display("TEST PASS");
        $finish;
    end
endmodule
"#;

/// Revisions of the FIFO, in the order a feedback loop repairs them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FifoRevision {
    /// `full` rises one entry early.
    EarlyFull,
    /// Reads while empty are not blocked.
    NoUnderflowGuard,
    Correct,
}

pub fn fifo_rtl(rev: FifoRevision) -> String {
    match rev {
        FifoRevision::EarlyFull => FIFO_V.replace("(count == DEPTH)", "(count == DEPTH - 1)"),
        FifoRevision::NoUnderflowGuard => FIFO_V.replace("rd_en && !empty", "rd_en"),
        FifoRevision::Correct => FIFO_V.to_string(),
    }
}

/// A module with no logic; synthesizes to zero cells.
pub const EMPTY_MODULE_V: &str = "module empty_top (input wire a);\nendmodule\n";

/// Clock constraint for the FIFO at the given period.
pub fn fifo_sdc(period_ns: f64) -> String {
    format!(
        "create_clock -name clk -period {period_ns} [get_ports clk]\n\
         set_input_delay 0 -clock clk [delete_from_list [all_inputs] [get_ports clk]]\n\
         set_output_delay 0 -clock clk [all_outputs]\n"
    )
}

pub const SIM_PASS_OUTPUT: &str = "TEST PASS\nfifo_tb.v:139: $finish called at 755000 (1ps)\n";

pub const SIM_FAIL_OUTPUT: &str = "TEST FAIL: underflow\nTEST FAIL: round trip after underflow\n\
fifo_tb.v:139: $finish called at 755000 (1ps)\n";

pub const YOSYS_STAT_OUTPUT: &str = "\
8. Printing statistics.

=== fifo ===

   Number of wires:                 61
   Number of wire bits:            145
   Number of public wires:          14
   Number of public wire bits:      38
   Number of memories:               0
   Number of memory bits:            0
   Number of processes:              0
   Number of cells:                 96
     $_ANDNOT_                      14
     $_AND_                          3
     $_DFFE_PP_                     12
     $_DFF_P_                        6
     $_MUX_                         36
     $_NOR_                          4
     $_NOT_                          3
     $_OR_                           9
     $_XOR_                          9

9. Executing Verilog backend.
";

pub const YOSYS_EMPTY_MODULE_OUTPUT: &str = "\
=== empty_top ===

   Number of wires:                  1
   Number of wire bits:              1
   Number of public wires:           1
   Number of public wire bits:       1
   Number of memories:               0
   Number of memory bits:            0
   Number of processes:              0
   Number of cells:                  0
";

pub const STA_OUTPUT: &str = "\
Startpoint: rd_ptr[0]$_DFFE_PP_ (rising edge-triggered flip-flop clocked by clk)
Endpoint: dout[3] (output port clocked by clk)
worst slack 6.82
";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn revisions_differ_in_one_place() {
        let correct = fifo_rtl(FifoRevision::Correct);
        for rev in [FifoRevision::EarlyFull, FifoRevision::NoUnderflowGuard] {
            let faulty = fifo_rtl(rev);
            assert_ne!(faulty, correct);
            let changed = faulty
                .lines()
                .zip(correct.lines())
                .filter(|(a, b)| a != b)
                .count();
            assert_eq!(changed, 1, "{rev:?}");
        }
    }

    #[test]
    fn fixture_shape() {
        assert!(FIFO_V.contains("parameter WIDTH = 6") && FIFO_V.contains("parameter DEPTH = 32"));
        assert!(FIFO_TB_V.contains("TEST PASS") && FIFO_TB_V.contains("fifo #("));
        assert!(fifo_sdc(10.0).contains("-period 10"));
    }
}
