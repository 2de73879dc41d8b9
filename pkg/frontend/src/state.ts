/** View state and actions.
 *
 * Invariants: at most one modal is open; expanded week/day sets only contain
 * indices that exist in the current plan; at most one mutation is in flight
 * (controls render disabled while pending); plan state only changes by
 * re-rendering a document the service returned. Expanding a week or day
 * posts its explanation-view event; every expansion counts, including
 * re-expansion.
 */

import { ApiClient, ApiError } from './api.js';
import type {
  Candidate,
  ChatResponse,
  CreatePlanForm,
  PlanDocument,
} from './types.js';

export interface ChatEntry {
  role: 'user' | 'system';
  text: string;
  intent?: 'edit' | 'question';
}

export interface AlternativesModal {
  week: number;
  day: number;
  resourceId: string;
  topic: string;
  candidates: Candidate[];
}

export interface ViewState {
  plan: PlanDocument | null;
  levels: Record<string, string> | null;
  levelsOpen: boolean;
  expandedWeeks: Set<number>;
  expandedDays: Set<string>; // "week.day"
  modal: AlternativesModal | null;
  chat: ChatEntry[];
  pending: boolean;
  banner: string | null;
  conflict: boolean;
}

export function initialState(): ViewState {
  return {
    plan: null,
    levels: null,
    levelsOpen: false,
    expandedWeeks: new Set(),
    expandedDays: new Set(),
    modal: null,
    chat: [],
    pending: false,
    banner: null,
    conflict: false,
  };
}

type Listener = (state: ViewState) => void;

export class Store {
  state: ViewState = initialState();
  private listeners: Listener[] = [];

  constructor(readonly api: ApiClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private patch(partial: Partial<ViewState>): void {
    this.state = { ...this.state, ...partial };
    this.notify();
  }

  private failure(error: unknown): void {
    if (error instanceof ApiError && error.status === 409) {
      this.patch({
        pending: false,
        conflict: true,
        banner: `The plan changed elsewhere (now version ${error.currentVersion}). Reload to continue.`,
      });
      return;
    }
    const message = error instanceof Error ? error.message : String(error);
    this.patch({ pending: false, banner: message });
  }

  /** A mutation may start only when none is in flight. */
  private begin(): boolean {
    if (this.state.pending) return false;
    this.patch({ pending: true, banner: null });
    return true;
  }

  dismissBanner(): void {
    this.patch({ banner: null });
  }

  // -- level descriptions (bulb popover) ---------------------------------

  async showLevelDescriptions(subject: string): Promise<void> {
    if (!this.begin()) return;
    try {
      const { levels } = await this.api.getLevels(subject);
      this.patch({ pending: false, levels, levelsOpen: true });
    } catch (error) {
      this.failure(error);
    }
  }

  hideLevelDescriptions(): void {
    this.patch({ levelsOpen: false });
  }

  // -- plan lifecycle ------------------------------------------------------

  async submitForm(form: CreatePlanForm): Promise<void> {
    if (!this.begin()) return;
    try {
      const plan = await this.api.createPlan(form);
      this.patch({
        pending: false,
        plan,
        expandedWeeks: new Set(),
        expandedDays: new Set(),
        modal: null,
        conflict: false,
      });
    } catch (error) {
      this.failure(error);
    }
  }

  async reloadLatest(): Promise<void> {
    const plan = this.state.plan;
    if (!plan) return;
    if (!this.begin()) return;
    try {
      const fresh = await this.api.getPlan(plan.plan_id);
      this.patch({
        pending: false,
        plan: fresh,
        conflict: false,
        modal: null,
        expandedWeeks: this.pruneWeeks(fresh),
        expandedDays: this.pruneDays(fresh),
      });
    } catch (error) {
      this.failure(error);
    }
  }

  private pruneWeeks(plan: PlanDocument): Set<number> {
    const valid = new Set(plan.weeks.map((w) => w.index));
    return new Set([...this.state.expandedWeeks].filter((w) => valid.has(w)));
  }

  private pruneDays(plan: PlanDocument): Set<string> {
    const valid = new Set(
      plan.weeks.flatMap((w) => w.days.map((d) => `${w.index}.${d.index}`)),
    );
    return new Set([...this.state.expandedDays].filter((k) => valid.has(k)));
  }

  // -- progressive disclosure ---------------------------------------------

  async toggleWeek(week: number): Promise<void> {
    const plan = this.state.plan;
    if (!plan || !plan.weeks.some((w) => w.index === week)) return;
    const expanded = new Set(this.state.expandedWeeks);
    if (expanded.has(week)) {
      expanded.delete(week);
      this.patch({ expandedWeeks: expanded });
      return;
    }
    expanded.add(week);
    this.patch({ expandedWeeks: expanded });
    await this.api.postEvent('viewed_week_explanation', plan.plan_id, {
      week: String(week),
    });
  }

  async toggleDay(week: number, day: number): Promise<void> {
    const plan = this.state.plan;
    const weekDoc = plan?.weeks.find((w) => w.index === week);
    if (!plan || !weekDoc || !weekDoc.days.some((d) => d.index === day)) return;
    const key = `${week}.${day}`;
    const expanded = new Set(this.state.expandedDays);
    if (expanded.has(key)) {
      expanded.delete(key);
      this.patch({ expandedDays: expanded });
      return;
    }
    expanded.add(key);
    this.patch({ expandedDays: expanded });
    await this.api.postEvent('viewed_day_explanation', plan.plan_id, {
      week: String(week),
      day: String(day),
    });
  }

  // -- alternatives modal ---------------------------------------------------

  async openAlternatives(
    week: number,
    day: number,
    resourceId: string,
  ): Promise<void> {
    const plan = this.state.plan;
    if (!plan) return;
    if (!this.begin()) return;
    try {
      const { topic, candidates } = await this.api.alternatives(
        plan.plan_id,
        week,
        day,
        resourceId,
      );
      // Replaces any open modal: at most one at a time.
      this.patch({
        pending: false,
        modal: { week, day, resourceId, topic, candidates },
      });
    } catch (error) {
      this.failure(error);
    }
  }

  closeModal(): void {
    this.patch({ modal: null });
  }

  async selectAlternative(candidateId: string): Promise<void> {
    const plan = this.state.plan;
    const modal = this.state.modal;
    if (!plan || !modal) return;
    if (!this.begin()) return;
    try {
      const updated = await this.api.replaceResource(
        plan.plan_id,
        modal.week,
        modal.day,
        modal.resourceId,
        candidateId,
        plan.version,
      );
      this.patch({ pending: false, plan: updated, modal: null });
    } catch (error) {
      this.failure(error);
    }
  }

  // -- in-line editing -------------------------------------------------------

  async applyInlineEdit(field: string, value: unknown): Promise<void> {
    const plan = this.state.plan;
    if (!plan) return;
    if (!this.begin()) return;
    try {
      const updated = await this.api.applyEdit(
        plan.plan_id,
        field,
        value,
        plan.version,
      );
      this.patch({
        pending: false,
        plan: updated,
        expandedWeeks: this.pruneWeeks(updated),
        expandedDays: this.pruneDays(updated),
      });
    } catch (error) {
      this.failure(error);
    }
  }

  // -- chat -------------------------------------------------------------------

  async sendChat(message: string): Promise<void> {
    const plan = this.state.plan;
    if (!plan || !message.trim()) return;
    if (!this.begin()) return;
    try {
      const response: ChatResponse = await this.api.sendChat(
        plan.plan_id,
        message,
        plan.version,
      );
      const chat: ChatEntry[] = [
        ...this.state.chat,
        { role: 'user', text: message, intent: response.intent },
        { role: 'system', text: response.reply },
      ];
      this.patch({
        pending: false,
        chat,
        plan: response.plan ?? plan,
      });
    } catch (error) {
      this.failure(error);
    }
  }
}
