/** Browser bootstrap: wires DOM events to store actions and re-renders.
 * Service base URL comes from ?api=, localStorage, or the default port. */

import { ApiClient } from './api.js';
import { renderApp } from './render.js';
import { Store } from './state.js';
import type { BackgroundLevel, CreatePlanForm } from './types.js';

function baseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('api');
  if (fromQuery) {
    window.localStorage.setItem('planglow.api', fromQuery);
    return fromQuery;
  }
  return window.localStorage.getItem('planglow.api') ?? 'http://127.0.0.1:8400';
}

function sessionId(): string {
  const existing = window.sessionStorage.getItem('planglow.session');
  if (existing) return existing;
  const fresh = crypto.randomUUID();
  window.sessionStorage.setItem('planglow.session', fresh);
  return fresh;
}

function formValues(form: HTMLFormElement): CreatePlanForm {
  const data = new FormData(form);
  return {
    subject: String(data.get('subject') ?? ''),
    goal: String(data.get('goal') ?? ''),
    background_level: String(data.get('background_level')) as BackgroundLevel,
    duration_weeks: Number(data.get('duration_weeks')),
    daily_minutes: Number(data.get('daily_minutes')),
  };
}

function readInlineEdits(root: HTMLElement, store: Store): void {
  const plan = store.state.plan;
  if (!plan) return;
  const inputs = root.querySelectorAll<HTMLInputElement | HTMLSelectElement>(
    '.inline-editors [data-field]',
  );
  for (const input of inputs) {
    const field = input.dataset['field']!;
    const raw = input.value;
    const current = (plan.profile as unknown as Record<string, unknown>)[field];
    const next =
      field === 'duration_weeks' || field === 'daily_minutes'
        ? Number(raw)
        : raw;
    if (next !== current) {
      void store.applyInlineEdit(field, next);
      return; // one edit per click; each edit re-runs the pipeline
    }
  }
}

export function bootstrap(root: HTMLElement): Store {
  const api = new ApiClient(baseUrl(), sessionId());
  const store = new Store(api);

  const redraw = () => {
    root.innerHTML = renderApp(store.state);
  };
  store.subscribe(redraw);
  redraw();

  root.addEventListener('click', (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>(
      '[data-action]',
    );
    if (!target || target instanceof HTMLFormElement) return;
    const data = target.dataset;
    switch (data['action']) {
      case 'show-levels': {
        const select = root.querySelector<HTMLSelectElement>(
          '[name="background_level"]',
        );
        const subject =
          root.querySelector<HTMLInputElement>('[name="subject"]')?.value ||
          store.state.plan?.profile.subject ||
          'general study skills';
        void select; // level choice does not affect the descriptions
        void store.showLevelDescriptions(subject);
        break;
      }
      case 'close-levels':
        store.hideLevelDescriptions();
        break;
      case 'toggle-week':
        void store.toggleWeek(Number(data['week']));
        break;
      case 'toggle-day':
        void store.toggleDay(Number(data['week']), Number(data['day']));
        break;
      case 'open-alternatives':
        void store.openAlternatives(
          Number(data['week']),
          Number(data['day']),
          data['resource']!,
        );
        break;
      case 'close-modal':
        store.closeModal();
        break;
      case 'select-alternative':
        void store.selectAlternative(data['id']!);
        break;
      case 'apply-edits':
        readInlineEdits(root, store);
        break;
      case 'reload-plan':
        void store.reloadLatest();
        break;
      case 'dismiss-banner':
        store.dismissBanner();
        break;
    }
  });

  root.addEventListener('submit', (event) => {
    const form = event.target as HTMLFormElement;
    event.preventDefault();
    if (form.id === 'create-form') {
      void store.submitForm(formValues(form));
    } else if (form.id === 'chat-form') {
      const input = form.elements.namedItem('message') as HTMLInputElement;
      const message = input.value.trim();
      if (message) {
        input.value = '';
        void store.sendChat(message);
      }
    }
  });

  return store;
}

if (typeof document !== 'undefined') {
  const root = document.getElementById('app');
  if (root) bootstrap(root);
}
