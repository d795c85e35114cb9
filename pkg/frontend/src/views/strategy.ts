// Strategy editor: edit the program text, validate server-side, run rounds,
// or fire a single named rule at the selected match (rule isolation).

import { ApiClient, ApiError, ValidationError } from "../api.js";
import type { SharedState } from "../events.js";

export class StrategyEditor {
  text = "";
  error: ValidationError | null = null;
  instructions: number | null = null;

  constructor(private shared: SharedState, private api: ApiClient,
              private session: string) {}

  setText(text: string): void {
    this.text = text;
    this.error = null;
    this.instructions = null;
  }

  async validate(): Promise<boolean> {
    try {
      const result = await this.api.validateStrategy(this.text);
      this.instructions = result.strategy.instructions;
      this.error = null;
      return true;
    } catch (err) {
      if (err instanceof ApiError && typeof err.detail === "object" && err.detail) {
        this.error = err.detail as ValidationError;
        return false;
      }
      throw err;
    }
  }

  runRounds(n: number): Promise<{ rounds: unknown[]; cursor: number }> {
    return this.api.runRounds(this.session, n);
  }

  /** Apply one rule at a match covering the current selection (or any
   *  random match when nothing is selected). */
  applyRule(rule: string): Promise<{ applied: boolean; child?: number }> {
    const selected = [...this.shared.selection].sort((a, b) => a - b);
    return this.api.apply(this.session, rule,
                          selected.length > 0 ? selected : "random");
  }
}
