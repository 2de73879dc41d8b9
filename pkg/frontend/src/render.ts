/** Pure rendering: view state in, HTML string out. Interactive controls
 * carry data-action attributes; the DOM glue in main.ts dispatches them. */

import type { ViewState } from './state.js';
import type {
  Candidate,
  DayDoc,
  ObjectiveDoc,
  PlanDocument,
  ResourceDoc,
  WeekDoc,
} from './types.js';
import { BACKGROUND_LEVELS } from './types.js';

export function esc(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;')
    .replaceAll("'", '&#39;');
}

function minutes(seconds: number): string {
  return `${Math.ceil(seconds / 60)} min`;
}

function count(n: number): string {
  if (n >= 1_000_000) return `${(n / 1_000_000).toFixed(1)}M`;
  if (n >= 1_000) return `${(n / 1_000).toFixed(1)}k`;
  return String(n);
}

export function renderObjectives(objectives: ObjectiveDoc[]): string {
  const items = objectives
    .map(
      (o) =>
        `<li class="objective"><span class="bloom bloom-${esc(o.bloom_level)}">${esc(
          o.bloom_level,
        )}</span> ${esc(o.text)}</li>`,
    )
    .join('');
  return `<ul class="objectives">${items}</ul>`;
}

const STATUS_ICONS: Record<string, { glyph: string; label: string }> = {
  valid: { glyph: '✓', label: 'Valid resource' },
  invalid: { glyph: '✗', label: 'Invalid resource' },
  replaced: { glyph: '✓', label: 'Replacement (verified)' },
};

export function renderResourceRow(
  resource: ResourceDoc,
  week: number,
  day: number,
): string {
  const icon = STATUS_ICONS[resource.status] ?? STATUS_ICONS['invalid']!;
  return `
    <li class="resource-row" data-resource="${esc(resource.external_id)}">
      <span class="icon icon-${esc(resource.status)}" title="${esc(icon.label)}" aria-label="${esc(icon.label)}">${icon.glyph}</span>
      <a class="resource-link" href="${esc(resource.url)}" target="_blank" rel="noreferrer">${esc(resource.title)}</a>
      <span class="resource-meta">${minutes(resource.duration_seconds)} · ${count(resource.views)} views · ${count(resource.likes)} likes</span>
      <button class="swap-button" data-action="open-alternatives"
        data-week="${week}" data-day="${day}" data-resource="${esc(resource.external_id)}">
        More resources
      </button>
    </li>`;
}

export function renderDayRow(
  day: DayDoc,
  week: number,
  expanded: boolean,
): string {
  const detail = expanded
    ? `
      <div class="day-detail">
        <p class="topic-rationale">${esc(day.topic_rationale)}</p>
        ${renderObjectives(day.objectives)}
        <ul class="resources">
          ${day.resources.map((r) => renderResourceRow(r, week, day.index)).join('')}
        </ul>
      </div>`
    : '';
  return `
    <li class="day-row ${expanded ? 'expanded' : ''}" data-day="${day.index}">
      <button class="day-header" data-action="toggle-day" data-week="${week}" data-day="${day.index}">
        Day ${day.index}: ${esc(day.topic)}
        <span class="estimate">${day.estimated_minutes} min</span>
      </button>
      ${detail}
    </li>`;
}

export function renderWeekCard(
  week: WeekDoc,
  expanded: boolean,
  expandedDays: Set<string>,
): string {
  const body = expanded
    ? `
      <div class="week-detail">
        ${renderObjectives(week.objectives)}
        <p class="content-rationale"><strong>Why this content:</strong> ${esc(week.content_rationale)}</p>
        <p class="connections"><strong>Connections:</strong> ${esc(week.connections)}</p>
        <ul class="days">
          ${week.days
            .map((d) =>
              renderDayRow(d, week.index, expandedDays.has(`${week.index}.${d.index}`)),
            )
            .join('')}
        </ul>
      </div>`
    : '';
  return `
    <section class="week-card ${expanded ? 'expanded' : ''}" data-week="${week.index}">
      <button class="week-header" data-action="toggle-week" data-week="${week.index}">
        Week ${week.index}: ${esc(week.title)}
      </button>
      ${body}
    </section>`;
}

export function renderLevelsPopover(levels: Record<string, string>): string {
  const rows = BACKGROUND_LEVELS.filter((name) => name in levels)
    .map(
      (name) =>
        `<dt class="level-name">${esc(name)}</dt><dd class="level-text">${esc(
          levels[name] ?? '',
        )}</dd>`,
    )
    .join('');
  return `
    <div class="levels-popover" role="dialog">
      <button data-action="close-levels" class="close-button">Close</button>
      <dl class="levels">${rows}</dl>
    </div>`;
}

export function renderForm(state: ViewState): string {
  const options = BACKGROUND_LEVELS.map(
    (name) => `<option value="${name}">${name.replace('_', ' ')}</option>`,
  ).join('');
  return `
    <form id="create-form" class="create-form" data-action="submit-form">
      <label>Subject <input name="subject" required placeholder="What do you want to study?"></label>
      <label>Goal <input name="goal" required placeholder="What do you want to achieve?"></label>
      <label>Background level
        <span class="level-field">
          <select name="background_level">${options}</select>
          <button type="button" class="bulb-button" data-action="show-levels" title="What do these levels mean?">💡</button>
        </span>
      </label>
      <label>Duration (weeks) <input name="duration_weeks" type="number" min="1" max="52" value="2"></label>
      <label>Daily availability (minutes) <input name="daily_minutes" type="number" min="10" max="960" value="60"></label>
      <button type="submit" ${state.pending ? 'disabled' : ''}>Create study plan</button>
    </form>
    ${state.levelsOpen && state.levels ? renderLevelsPopover(state.levels) : ''}`;
}

export function renderInlineEditors(plan: PlanDocument, pending: boolean): string {
  const disabled = pending ? 'disabled' : '';
  const levelOptions = BACKGROUND_LEVELS.map(
    (name) =>
      `<option value="${name}" ${
        name === plan.profile.background_level ? 'selected' : ''
      }>${name.replace('_', ' ')}</option>`,
  ).join('');
  return `
    <div class="inline-editors">
      <label>Subject <input data-field="subject" value="${esc(plan.profile.subject)}" ${disabled}></label>
      <label>Goal <input data-field="goal" value="${esc(plan.profile.goal)}" ${disabled}></label>
      <label>Level <select data-field="background_level" ${disabled}>${levelOptions}</select></label>
      <label>Weeks <input data-field="duration_weeks" type="number" min="1" max="52" value="${plan.profile.duration_weeks}" ${disabled}></label>
      <label>Minutes/day <input data-field="daily_minutes" type="number" min="10" max="960" value="${plan.profile.daily_minutes}" ${disabled}></label>
      <button data-action="apply-edits" ${disabled}>Apply changes</button>
    </div>`;
}

export function renderModal(state: ViewState): string {
  const modal = state.modal;
  if (!modal) return '';
  const rows = modal.candidates
    .map(
      (candidate: Candidate) => `
      <li class="alt-item" data-rank="${candidate.rank}">
        <a class="alt-title" href="${esc(candidate.url)}" target="_blank" rel="noreferrer">${esc(candidate.title)}</a>
        <span class="alt-meta">${minutes(candidate.duration_seconds)} · ${count(candidate.views)} views · ${count(candidate.likes)} likes</span>
        <p class="alt-description">${esc(candidate.description)}</p>
        <button class="select-button" data-action="select-alternative"
          data-id="${esc(candidate.external_id)}" ${state.pending ? 'disabled' : ''}>
          Select
        </button>
      </li>`,
    )
    .join('');
  return `
    <div class="modal-backdrop">
      <div class="modal alternatives-modal" role="dialog" aria-label="Alternative resources">
        <header>
          <h3>Alternatives for ${esc(modal.topic)}</h3>
          <button data-action="close-modal" class="close-button">Close</button>
        </header>
        <ul class="alt-list">${rows || '<li class="alt-empty">No alternatives found.</li>'}</ul>
      </div>
    </div>`;
}

export function renderChatPanel(state: ViewState): string {
  const turns = state.chat
    .map(
      (turn) =>
        `<li class="chat-turn chat-${turn.role}">${esc(turn.text)}${
          turn.intent ? ` <span class="intent">[${turn.intent}]</span>` : ''
        }</li>`,
    )
    .join('');
  return `
    <aside class="chat-panel">
      <h3>Chat</h3>
      <ul class="chat-history">${turns}</ul>
      <form id="chat-form" data-action="send-chat">
        <input name="message" placeholder="Edit the plan or ask a question" ${state.pending ? 'disabled' : ''}>
        <button type="submit" ${state.pending ? 'disabled' : ''}>Send</button>
      </form>
    </aside>`;
}

export function renderBanner(state: ViewState): string {
  if (!state.banner) return '';
  const reload = state.conflict
    ? '<button data-action="reload-plan">Reload latest</button>'
    : '';
  return `
    <div class="banner" role="alert">
      <span class="banner-text">${esc(state.banner)}</span>
      ${reload}
      <button data-action="dismiss-banner">Dismiss</button>
    </div>`;
}

export function renderPlanOverview(state: ViewState): string {
  const plan = state.plan!;
  return `
    <header class="plan-header">
      <h2>${esc(plan.profile.subject)} · ${esc(plan.profile.goal)}</h2>
      <span class="plan-version">v${plan.version}</span>
    </header>
    ${renderInlineEditors(plan, state.pending)}
    <main class="weeks">
      ${plan.weeks
        .map((w) =>
          renderWeekCard(w, state.expandedWeeks.has(w.index), state.expandedDays),
        )
        .join('')}
    </main>
    ${renderChatPanel(state)}
    ${renderModal(state)}
    ${state.levelsOpen && state.levels ? renderLevelsPopover(state.levels) : ''}`;
}

export function renderApp(state: ViewState): string {
  const body = state.plan ? renderPlanOverview(state) : renderForm(state);
  return `<div class="app ${state.pending ? 'pending' : ''}">${renderBanner(state)}${body}</div>`;
}
